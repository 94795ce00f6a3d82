#include "cholesky.hpp"

#include <cmath>

namespace lassorec::detail {

IncrementalCholesky::IncrementalCholesky(int capacity) {
  reserve(capacity > 0 ? capacity : 8);
}

void IncrementalCholesky::reserve(int capacity) {
  if (capacity <= L_.rows()) return;
  Matrix grown = Matrix::Zero(capacity, capacity);
  grown.topLeftCorner(k_, k_) = L_.topLeftCorner(k_, k_);
  L_.swap(grown);
}

bool IncrementalCholesky::insert(const Vector& cross, double diag,
                                 double rel_tol) {
  Vector l = cross;
  if (k_ > 0)
    L_.topLeftCorner(k_, k_).triangularView<Eigen::Lower>().solveInPlace(l);
  double pivot = diag - l.squaredNorm();
  if (!(pivot > rel_tol * diag)) return false;
  if (k_ == L_.rows()) reserve(2 * k_);
  L_.row(k_).head(k_) = l.transpose();
  L_(k_, k_) = std::sqrt(pivot);
  ++k_;
  return true;
}

void IncrementalCholesky::remove(int pos) {
  // Dropping row pos leaves one superdiagonal entry per later row; rotate
  // column pairs to restore lower-triangular form.
  for (int i = pos; i + 1 < k_; ++i) L_.row(i) = L_.row(i + 1);
  L_.row(k_ - 1).setZero();
  for (int i = pos; i + 1 < k_; ++i) {
    double a = L_(i, i), b = L_(i, i + 1);
    double r = std::hypot(a, b);
    double c = a / r, s = b / r;
    for (int row = i; row < k_ - 1; ++row) {
      double x = L_(row, i), y = L_(row, i + 1);
      L_(row, i) = c * x + s * y;
      L_(row, i + 1) = -s * x + c * y;
    }
    L_(i, i + 1) = 0.0;
    if (L_(i, i) < 0) L_.col(i).segment(i, k_ - 1 - i) *= -1.0;
  }
  L_.col(k_ - 1).setZero();
  --k_;
}

Vector IncrementalCholesky::solve(const Vector& rhs) const {
  Vector x = rhs;
  L_.topLeftCorner(k_, k_).triangularView<Eigen::Lower>().solveInPlace(x);
  L_.topLeftCorner(k_, k_).transpose().triangularView<Eigen::Upper>().solveInPlace(x);
  return x;
}

}  // namespace lassorec::detail
