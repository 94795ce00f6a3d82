#pragma once

#include "lassorec/model.hpp"

namespace lassorec::detail {

// Cholesky factor L L^T = A of a growing and shrinking Gram matrix.
class IncrementalCholesky {
 public:
  explicit IncrementalCholesky(int capacity = 0);

  int size() const { return k_; }

  // Appends a row/column with off-diagonal `cross` and diagonal `diag`.
  // Returns false (and leaves the factor unchanged) when the new pivot is
  // below rel_tol * diag.
  bool insert(const Vector& cross, double diag, double rel_tol = 1e-10);
  // Removes row/column `pos` with Givens rotations.
  void remove(int pos);
  Vector solve(const Vector& rhs) const;

 private:
  void reserve(int capacity);

  Matrix L_;
  int k_ = 0;
};

}  // namespace lassorec::detail
