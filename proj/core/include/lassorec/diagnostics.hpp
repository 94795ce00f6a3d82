#pragma once

// Design diagnostics on C = X^T X / n: sparse eigenvalues, the
// irrepresentable condition, sparsity multipliers, block designs and UUP.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "lassorec/model.hpp"

namespace lassorec {

enum class EigMode { kExact, kHeuristic, kAuto };

// Extremes over principal submatrices of size at most m. Heuristic values
// are attained on the witness sets, so phi_min is an upper bound and phi_max
// a lower bound on the exact values.
struct SparseEigReport {
  int m = 0;
  double phi_min = 0.0;
  double phi_max = 0.0;
  bool exact = false;
  IndexSet witness_min;
  IndexSet witness_max;
};

struct SparseEigOptions {
  EigMode mode = EigMode::kExact;
  std::uint64_t enumeration_cap = 2'000'000;
  int restarts = 64;
  std::uint64_t seed = 0x5eed;
  int threads = 1;
};

// Number of subsets of size 1..m, saturating at UINT64_MAX.
std::uint64_t subset_count(int p, int m);

SparseEigReport sparse_eig(const GramMatrix& C, int m,
                           const SparseEigOptions& options = {});

// Exact reports for every size 1..m_max from one enumeration pass.
std::vector<SparseEigReport> sparse_eig_profile(
    const GramMatrix& C, int m_max, const SparseEigOptions& options = {});

struct IrrepresentableReport {
  IndexSet support;
  std::vector<int> signs;
  double value = 0.0;  // ||C_NK C_KK^{-1} s_K||_inf
  bool holds = false;  // value < 1
  double margin = 0.0;
  double erc = 0.0;  // 1 - max row-sum norm of C_NK C_KK^{-1}
  double condition_number = 0.0;
  int worst_column = -1;
};

IrrepresentableReport irrepresentable_check(const GramMatrix& C,
                                            const IndexSet& support,
                                            std::span<const int> signs);

struct IncoherenceReport {
  int s = 0;
  int n = 0;
  double threshold = 18.0;
  std::optional<double> e_star;
  std::vector<double> grid;
  std::vector<double> ratio;
  std::vector<int> phi_min_size;
  std::vector<double> phi_min;
  int phi_max_size = 0;
  double phi_max = 0.0;
  bool heuristic_used = false;
};

struct MultiplierOptions {
  double threshold = 18.0;
  SparseEigOptions eig{EigMode::kAuto};
};

// 1, 1.25, ... up to the largest e with ceil(e^2 s) <= p.
std::vector<double> default_multiplier_grid(int s, int p);

IncoherenceReport multiplier_search(const GramMatrix& C, int s, int n,
                                    std::vector<double> grid = {},
                                    const MultiplierOptions& options = {});

struct BlockDesignReport {
  double phi_min_block = 0.0;
  double phi_max_block = 0.0;
  double condition_number = 0.0;
  std::optional<double> sparsity_ceiling;  // n / c^2 when n is given
  int p = 0;
};

BlockDesignReport block_design_report(std::span<const GramMatrix> blocks,
                                      std::optional<int> n = std::nullopt);
GramMatrix assemble_block_diagonal(std::span<const GramMatrix> blocks);

struct UupReport {
  int s = 0;
  double phi_min[3] = {0, 0, 0};  // sizes s, 2s, 3s
  double phi_max[3] = {0, 0, 0};
  double min_sum = 0.0;
  double max_sum = 0.0;
  bool lower_holds = false;  // min_sum > 2
  bool upper_holds = false;  // max_sum < 4
  bool exact = false;
};

UupReport uup_check(const GramMatrix& C, int s,
                    const SparseEigOptions& options = {EigMode::kAuto});

}  // namespace lassorec
