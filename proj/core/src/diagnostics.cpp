#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "lassorec/diagnostics.hpp"
#include "lassorec/errors.hpp"

namespace lassorec {

IrrepresentableReport irrepresentable_check(const GramMatrix& C,
                                            const IndexSet& support_in,
                                            std::span<const int> signs_in) {
  const int p = C.p();
  if (support_in.empty()) throw InputError("support must be non-empty");
  if (support_in.size() != signs_in.size())
    throw InputError("support and sign vector differ in length");
  std::vector<int> order(support_in.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return support_in[a] < support_in[b]; });
  IrrepresentableReport r;
  for (int i : order) {
    int k = support_in[i];
    if (k < 0 || k >= p) throw InputError("support index out of range");
    if (!r.support.empty() && r.support.back() == k)
      throw InputError("support has a repeated index");
    if (signs_in[i] != 1 && signs_in[i] != -1)
      throw InputError("support signs must be +1 or -1");
    r.support.push_back(k);
    r.signs.push_back(signs_in[i]);
  }
  const IndexSet& K = r.support;
  const IndexSet N = complement(K, p);

  Matrix CKK = C.sub(K, K);
  Eigen::SelfAdjointEigenSolver<Matrix> es(CKK, Eigen::EigenvaluesOnly);
  double lo = es.eigenvalues()(0), hi = es.eigenvalues()(K.size() - 1);
  if (!(lo > 1e-12 * std::max(hi, 1e-300)))
    throw SingularSystemError("C_KK is singular", K);
  r.condition_number = hi / lo;

  if (N.empty()) {
    r.value = 0.0;
    r.erc = 1.0;
  } else {
    // Z = C_NK C_KK^{-1}, solved as C_KK^{-1} C_KN then transposed.
    Matrix Z = CKK.ldlt().solve(C.sub(K, N)).transpose();
    Vector s(K.size());
    for (std::size_t i = 0; i < K.size(); ++i) s(i) = r.signs[i];
    Vector v = Z * s;
    Eigen::Index at = 0;
    r.value = v.cwiseAbs().maxCoeff(&at);
    r.worst_column = N[at];
    r.erc = 1.0 - Z.cwiseAbs().rowwise().sum().maxCoeff();
  }
  r.margin = 1.0 - r.value;
  r.holds = r.value < 1.0;
  return r;
}

std::vector<double> default_multiplier_grid(int s, int p) {
  std::vector<double> grid;
  for (int i = 0;; ++i) {
    double e = 1.0 + 0.25 * i;
    if (std::ceil(e * e * s - 1e-12) > p) break;
    grid.push_back(e);
  }
  return grid;
}

IncoherenceReport multiplier_search(const GramMatrix& C, int s, int n,
                                    std::vector<double> grid,
                                    const MultiplierOptions& options) {
  const int p = C.p();
  if (s < 1 || s > p) throw InputError("sparsity must lie in 1..p");
  if (n < 1) throw InputError("sample size must be positive");
  if (grid.empty()) grid = default_multiplier_grid(s, p);
  if (grid.empty()) throw InputError("empty multiplier grid");
  for (std::size_t i = 0; i < grid.size(); ++i)
    if (!(grid[i] > 0) || (i > 0 && grid[i] <= grid[i - 1]))
      throw InputError("multiplier grid must be positive and increasing");

  IncoherenceReport r;
  r.s = s;
  r.n = n;
  r.threshold = options.threshold;
  r.grid = grid;
  r.phi_max_size = std::min(p, s + std::min(n, p));
  SparseEigReport top = sparse_eig(C, r.phi_max_size, options.eig);
  r.phi_max = top.phi_max;
  r.heuristic_used = !top.exact;

  std::map<int, SparseEigReport> cache;
  for (double e : grid) {
    int m = std::min(p, static_cast<int>(std::ceil(e * e * s - 1e-12)));
    m = std::max(m, 1);
    auto it = cache.find(m);
    if (it == cache.end()) it = cache.emplace(m, sparse_eig(C, m, options.eig)).first;
    const SparseEigReport& eig = it->second;
    r.heuristic_used = r.heuristic_used || !eig.exact;
    double ratio = r.phi_max > 0 ? e * eig.phi_min / r.phi_max : 0.0;
    r.phi_min_size.push_back(m);
    r.phi_min.push_back(eig.phi_min);
    r.ratio.push_back(ratio);
    if (!r.e_star && ratio >= options.threshold) r.e_star = e;
  }
  return r;
}

BlockDesignReport block_design_report(std::span<const GramMatrix> blocks,
                                      std::optional<int> n) {
  if (blocks.empty()) throw InputError("no blocks given");
  BlockDesignReport r;
  r.phi_min_block = std::numeric_limits<double>::infinity();
  r.phi_max_block = 0.0;
  for (const auto& b : blocks) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(b.entries(),
                                             Eigen::EigenvaluesOnly);
    r.phi_min_block = std::min(r.phi_min_block, std::max(0.0, es.eigenvalues()(0)));
    r.phi_max_block = std::max(r.phi_max_block, es.eigenvalues()(b.p() - 1));
    r.p += b.p();
  }
  r.condition_number = r.phi_min_block > 0
                           ? r.phi_max_block / r.phi_min_block
                           : std::numeric_limits<double>::infinity();
  if (n && std::isfinite(r.condition_number))
    r.sparsity_ceiling = *n / (r.condition_number * r.condition_number);
  return r;
}

GramMatrix assemble_block_diagonal(std::span<const GramMatrix> blocks) {
  int p = 0;
  for (const auto& b : blocks) p += b.p();
  Matrix C = Matrix::Zero(p, p);
  int at = 0;
  for (const auto& b : blocks) {
    C.block(at, at, b.p(), b.p()) = b.entries();
    at += b.p();
  }
  return GramMatrix(std::move(C));
}

UupReport uup_check(const GramMatrix& C, int s,
                    const SparseEigOptions& options) {
  if (s < 1 || 3 * s > C.p())
    throw InputError("UUP check needs 1 <= s and 3s <= p");
  UupReport r;
  r.s = s;
  r.exact = true;
  for (int i = 0; i < 3; ++i) {
    SparseEigReport e = sparse_eig(C, (i + 1) * s, options);
    r.phi_min[i] = e.phi_min;
    r.phi_max[i] = e.phi_max;
    r.exact = r.exact && e.exact;
    r.min_sum += e.phi_min;
    r.max_sum += e.phi_max;
  }
  r.lower_holds = r.min_sum > 2.0;
  r.upper_holds = r.max_sum < 4.0;
  return r;
}

}  // namespace lassorec
