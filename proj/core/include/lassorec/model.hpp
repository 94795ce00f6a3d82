#pragma once

// Shared data model. Column indices are 0-based in the library and 1-based
// in every file or CLI representation.

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace lassorec {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
// Sorted ascending, no duplicates.
using IndexSet = std::vector<int>;

// Cosine threshold for flagging two columns as collinear.
inline constexpr double kCollinearTol = 1e-10;

class DesignMatrix {
 public:
  explicit DesignMatrix(Matrix entries, std::vector<std::string> labels = {});

  const Matrix& entries() const { return entries_; }
  int n() const { return static_cast<int>(entries_.rows()); }
  int p() const { return static_cast<int>(entries_.cols()); }
  const std::vector<std::string>& labels() const { return labels_; }
  const Vector& column_sq_norms() const { return sq_norms_; }

  // Pairs (i, j), i < j, of columns collinear within kCollinearTol.
  const std::vector<std::pair<int, int>>& collinear_pairs() const {
    return collinear_;
  }
  bool flagged() const { return !collinear_.empty(); }
  bool normalized() const { return normalized_; }

  // Rescales every column to squared norm n. Opt-in; sets normalized().
  DesignMatrix normalize_columns() const;

 private:
  Matrix entries_;
  std::vector<std::string> labels_;
  Vector sq_norms_;
  std::vector<std::pair<int, int>> collinear_;
  bool normalized_ = false;
};

class GramMatrix {
 public:
  // Validates symmetry (1e-12 after symmetrization) and PSD.
  explicit GramMatrix(Matrix entries);

  const Matrix& entries() const { return entries_; }
  int p() const { return static_cast<int>(entries_.rows()); }
  double operator()(int i, int j) const { return entries_(i, j); }
  Matrix sub(const IndexSet& rows, const IndexSet& cols) const;
  // Number of samples behind C when known; bounds its rank.
  std::optional<int> sample_size() const { return sample_size_; }

 private:
  friend GramMatrix build_gram(const DesignMatrix& design);
  struct Trusted {};
  GramMatrix(Matrix entries, int n, Trusted);

  Matrix entries_;
  std::optional<int> sample_size_;
};

GramMatrix build_gram(const DesignMatrix& design);

class SignPattern {
 public:
  SignPattern() = default;
  explicit SignPattern(std::vector<int> signs);

  int size() const { return static_cast<int>(signs_.size()); }
  int operator[](int k) const { return signs_[k]; }
  const std::vector<int>& values() const { return signs_; }
  std::vector<int> restricted(const IndexSet& idx) const;
  bool operator==(const SignPattern& other) const = default;

 private:
  std::vector<int> signs_;
};

SignPattern sign_of(const Vector& v);
IndexSet support(const Vector& v);
IndexSet complement(const IndexSet& set, int p);

class TruthSpec {
 public:
  TruthSpec(Vector beta, double sigma);

  const Vector& beta() const { return beta_; }
  const IndexSet& support() const { return support_; }
  int sparsity() const { return static_cast<int>(support_.size()); }
  double sigma() const { return sigma_; }

 private:
  Vector beta_;
  IndexSet support_;
  double sigma_;
};

class RegressionProblem {
 public:
  RegressionProblem(std::shared_ptr<const DesignMatrix> design, Vector response,
                    std::optional<TruthSpec> truth = std::nullopt,
                    std::optional<Vector> noise = std::nullopt);

  // Y = X beta + noise.
  static RegressionProblem simulate(std::shared_ptr<const DesignMatrix> design,
                                    TruthSpec truth, Vector noise);

  const DesignMatrix& design() const { return *design_; }
  const std::shared_ptr<const DesignMatrix>& design_ptr() const {
    return design_;
  }
  const Matrix& X() const { return design_->entries(); }
  const Vector& response() const { return response_; }
  const std::optional<TruthSpec>& truth() const { return truth_; }
  const std::optional<Vector>& noise() const { return noise_; }
  int n() const { return design_->n(); }
  int p() const { return design_->p(); }

 private:
  std::shared_ptr<const DesignMatrix> design_;
  Vector response_;
  std::optional<TruthSpec> truth_;
  std::optional<Vector> noise_;
};

// arg min ||b||_1 subject to X b = target, as the lambda -> 0+ end of the
// homotopy path. Throws InfeasibleError when target is outside span(X).
Vector minimal_l1_representation(const DesignMatrix& design,
                                 const Vector& target);

}  // namespace lassorec
