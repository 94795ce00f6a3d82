#pragma once

// Independent reference computations for tests. Nothing here calls the
// library's solvers or eigen routines.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// n^-1 X^T X by explicit triple loop.
inline Matrix gram_triple_loop(const Matrix& X) {
  const int n = static_cast<int>(X.rows()), p = static_cast<int>(X.cols());
  Matrix C(p, p);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j) {
      double acc = 0.0;
      for (int r = 0; r < n; ++r) acc += X(r, i) * X(r, j);
      C(i, j) = acc / n;
    }
  return C;
}

// Cyclic Jacobi rotations; eigenvalues sorted ascending.
inline std::vector<double> jacobi_eigenvalues(Matrix A) {
  const int n = static_cast<int>(A.rows());
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) off += A(i, j) * A(i, j);
    if (off < 1e-30) break;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) {
        if (A(p, q) == 0.0) continue;
        double theta = (A(q, q) - A(p, p)) / (2.0 * A(p, q));
        double t = (theta >= 0 ? 1.0 : -1.0) /
                   (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
        for (int k = 0; k < n; ++k) {
          double akp = A(k, p), akq = A(k, q);
          A(k, p) = c * akp - s * akq;
          A(k, q) = s * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          double apk = A(p, k), aqk = A(q, k);
          A(p, k) = c * apk - s * aqk;
          A(q, k) = s * apk + c * aqk;
        }
      }
  }
  std::vector<double> ev(n);
  for (int i = 0; i < n; ++i) ev[i] = A(i, i);
  std::sort(ev.begin(), ev.end());
  return ev;
}

struct Extremes {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
};

// Extremes over all principal submatrices with 1..m rows, by bitmask.
inline Extremes brute_sparse_extremes(const Matrix& C, int m) {
  const int p = static_cast<int>(C.rows());
  Extremes out;
  for (std::uint32_t mask = 1; mask < (1u << p); ++mask) {
    int k = __builtin_popcount(mask);
    if (k > m) continue;
    std::vector<int> idx;
    for (int i = 0; i < p; ++i)
      if (mask & (1u << i)) idx.push_back(i);
    Matrix sub(k, k);
    for (int a = 0; a < k; ++a)
      for (int b = 0; b < k; ++b) sub(a, b) = C(idx[a], idx[b]);
    auto ev = jacobi_eigenvalues(sub);
    out.lo = std::min(out.lo, ev.front());
    out.hi = std::max(out.hi, ev.back());
  }
  return out;
}

inline double soft(double z, double t) {
  return z > t ? z - t : (z < -t ? z + t : 0.0);
}

// Solves the square system A x = b by Gauss-Jordan with partial pivoting.
inline Vector gauss_solve(Matrix A, Vector b) {
  const int n = static_cast<int>(A.rows());
  for (int c = 0; c < n; ++c) {
    int piv = c;
    for (int r = c + 1; r < n; ++r)
      if (std::abs(A(r, c)) > std::abs(A(piv, c))) piv = r;
    A.row(c).swap(A.row(piv));
    std::swap(b(c), b(piv));
    for (int r = 0; r < n; ++r) {
      if (r == c) continue;
      double f = A(r, c) / A(c, c);
      A.row(r) -= f * A.row(c);
      b(r) -= f * b(c);
    }
  }
  for (int i = 0; i < n; ++i) b(i) /= A(i, i);
  return b;
}

// Explicit 3x3 inverse by cofactors.
inline Matrix inverse3(const Matrix& a) {
  Matrix cof(3, 3);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      int r0 = (i + 1) % 3, r1 = (i + 2) % 3, c0 = (j + 1) % 3, c1 = (j + 2) % 3;
      cof(i, j) = a(r0, c0) * a(r1, c1) - a(r0, c1) * a(r1, c0);
    }
  double det = a(0, 0) * cof(0, 0) + a(0, 1) * cof(0, 1) + a(0, 2) * cof(0, 2);
  return cof.transpose() / det;
}

}  // namespace oracle
