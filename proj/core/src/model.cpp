#include "lassorec/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "lassorec/errors.hpp"

namespace lassorec {

ZeroColumnError::ZeroColumnError(int column)
    : InputError("design column " + std::to_string(column + 1) +
                 " is identically zero"),
      column_(column) {}

ConvergenceError::ConvergenceError(const std::string& what, double last_gap,
                                   int sweeps)
    : Error(what), last_gap_(last_gap), sweeps_(sweeps) {}

DegeneratePathError::DegeneratePathError(const std::string& what,
                                         std::vector<int> columns)
    : Error(what + " (columns " + format_columns(columns) + ")"),
      columns_(std::move(columns)) {}

SingularSystemError::SingularSystemError(const std::string& what,
                                         std::vector<int> columns)
    : Error(what + " (columns " + format_columns(columns) + ")"),
      columns_(std::move(columns)) {}

IoError::IoError(const std::string& what, std::string path)
    : Error(what + ": " + path), path_(std::move(path)) {}

std::string format_columns(const std::vector<int>& columns) {
  std::ostringstream os;
  os << '{';
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (i) os << ", ";
    os << columns[i] + 1;
  }
  os << '}';
  return os.str();
}

namespace {

std::vector<std::pair<int, int>> find_collinear(const Matrix& X,
                                                const Vector& sq_norms) {
  Matrix G = Matrix::Zero(X.cols(), X.cols());
  G.selfadjointView<Eigen::Lower>().rankUpdate(X.transpose());
  std::vector<std::pair<int, int>> pairs;
  for (int j = 0; j < X.cols(); ++j) {
    for (int i = 0; i < j; ++i) {
      double cos = std::abs(G(j, i)) / std::sqrt(sq_norms(i) * sq_norms(j));
      if (cos >= 1.0 - kCollinearTol) pairs.emplace_back(i, j);
    }
  }
  return pairs;
}

}  // namespace

DesignMatrix::DesignMatrix(Matrix entries, std::vector<std::string> labels)
    : entries_(std::move(entries)), labels_(std::move(labels)) {
  if (entries_.rows() < 1 || entries_.cols() < 1)
    throw InputError("design must have at least one row and one column");
  if (!entries_.allFinite())
    throw InputError("design contains non-finite entries");
  if (!labels_.empty() && static_cast<int>(labels_.size()) != p())
    throw InputError("design has " + std::to_string(p()) + " columns but " +
                     std::to_string(labels_.size()) + " labels");
  sq_norms_ = entries_.colwise().squaredNorm().transpose();
  for (int k = 0; k < p(); ++k)
    if (sq_norms_(k) == 0.0) throw ZeroColumnError(k);
  collinear_ = find_collinear(entries_, sq_norms_);
}

DesignMatrix DesignMatrix::normalize_columns() const {
  Matrix scaled = entries_;
  for (int k = 0; k < p(); ++k)
    scaled.col(k) *= std::sqrt(static_cast<double>(n()) / sq_norms_(k));
  DesignMatrix out(std::move(scaled), labels_);
  out.normalized_ = true;
  return out;
}

GramMatrix::GramMatrix(Matrix entries) {
  if (entries.rows() != entries.cols() || entries.rows() < 1)
    throw InputError("Gram matrix must be square and non-empty");
  if (!entries.allFinite())
    throw InputError("Gram matrix contains non-finite entries");
  double scale = std::max(1.0, entries.cwiseAbs().maxCoeff());
  if ((entries - entries.transpose()).cwiseAbs().maxCoeff() > 1e-8 * scale)
    throw InputError("Gram matrix is not symmetric");
  entries_ = 0.5 * (entries + entries.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(entries_, Eigen::EigenvaluesOnly);
  double norm = eig.eigenvalues().cwiseAbs().maxCoeff();
  if (eig.eigenvalues()(0) < -1e-10 * norm)
    throw InputError("Gram matrix is not positive semi-definite (eigenvalue " +
                     std::to_string(eig.eigenvalues()(0)) + ")");
}

GramMatrix::GramMatrix(Matrix entries, int n, Trusted)
    : entries_(std::move(entries)), sample_size_(n) {}

Matrix GramMatrix::sub(const IndexSet& rows, const IndexSet& cols) const {
  Matrix out(rows.size(), cols.size());
  for (std::size_t j = 0; j < cols.size(); ++j)
    for (std::size_t i = 0; i < rows.size(); ++i)
      out(i, j) = entries_(rows[i], cols[j]);
  return out;
}

GramMatrix build_gram(const DesignMatrix& design) {
  const Matrix& X = design.entries();
  Matrix C = Matrix::Zero(X.cols(), X.cols());
  C.selfadjointView<Eigen::Lower>().rankUpdate(X.transpose(),
                                              1.0 / design.n());
  C.triangularView<Eigen::StrictlyUpper>() = C.transpose();
  return GramMatrix(std::move(C), design.n(), GramMatrix::Trusted{});
}

SignPattern::SignPattern(std::vector<int> signs) : signs_(std::move(signs)) {
  for (int s : signs_)
    if (s < -1 || s > 1) throw InputError("sign entries must be -1, 0 or +1");
}

std::vector<int> SignPattern::restricted(const IndexSet& idx) const {
  std::vector<int> out;
  out.reserve(idx.size());
  for (int k : idx) out.push_back(signs_[k]);
  return out;
}

SignPattern sign_of(const Vector& v) {
  std::vector<int> s(v.size());
  for (Eigen::Index k = 0; k < v.size(); ++k)
    s[k] = (v(k) > 0) - (v(k) < 0);
  return SignPattern(std::move(s));
}

IndexSet support(const Vector& v) {
  IndexSet out;
  for (Eigen::Index k = 0; k < v.size(); ++k)
    if (v(k) != 0.0) out.push_back(static_cast<int>(k));
  return out;
}

IndexSet complement(const IndexSet& set, int p) {
  IndexSet out;
  std::size_t j = 0;
  for (int k = 0; k < p; ++k) {
    if (j < set.size() && set[j] == k) {
      ++j;
      continue;
    }
    out.push_back(k);
  }
  return out;
}

TruthSpec::TruthSpec(Vector beta, double sigma)
    : beta_(std::move(beta)), sigma_(sigma) {
  if (!beta_.allFinite()) throw InputError("true coefficients not finite");
  if (!(sigma_ >= 0.0) || !std::isfinite(sigma_))
    throw InputError("noise level must be finite and nonnegative");
  support_ = lassorec::support(beta_);
}

RegressionProblem::RegressionProblem(std::shared_ptr<const DesignMatrix> design,
                                     Vector response,
                                     std::optional<TruthSpec> truth,
                                     std::optional<Vector> noise)
    : design_(std::move(design)),
      response_(std::move(response)),
      truth_(std::move(truth)),
      noise_(std::move(noise)) {
  if (!design_) throw InputError("problem needs a design");
  if (response_.size() != n())
    throw InputError("response has length " + std::to_string(response_.size()) +
                     ", design has " + std::to_string(n()) + " rows");
  if (!response_.allFinite()) throw InputError("response not finite");
  if (truth_ && truth_->beta().size() != p())
    throw InputError("true coefficient vector length differs from p");
  if (noise_) {
    if (noise_->size() != n()) throw InputError("noise length differs from n");
    if (!noise_->allFinite()) throw InputError("noise not finite");
  }
  if (truth_ && noise_) {
    double scale = std::max(1.0, response_.cwiseAbs().maxCoeff());
    Vector gap = response_ - X() * truth_->beta() - *noise_;
    if (gap.cwiseAbs().maxCoeff() > 1e-12 * scale)
      throw InputError("response differs from X beta + noise");
  }
}

RegressionProblem RegressionProblem::simulate(
    std::shared_ptr<const DesignMatrix> design, TruthSpec truth, Vector noise) {
  Vector y = design->entries() * truth.beta() + noise;
  return RegressionProblem(std::move(design), std::move(y), std::move(truth),
                           std::move(noise));
}

}  // namespace lassorec
