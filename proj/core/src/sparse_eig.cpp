#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <thread>

#include "lassorec/diagnostics.hpp"
#include "lassorec/errors.hpp"
#include "lassorec/random.hpp"

namespace lassorec {

std::uint64_t subset_count(int p, int m) {
  constexpr std::uint64_t kMax = std::numeric_limits<std::uint64_t>::max();
  std::uint64_t total = 0, term = 1;
  for (int k = 1; k <= m && k <= p; ++k) {
    const std::uint64_t f = static_cast<std::uint64_t>(p - k + 1);
    // term * f is divisible by k: term * f / k = binomial(p, k).
    if (term > kMax / f) return kMax;
    term = term * f / static_cast<std::uint64_t>(k);
    if (total > kMax - term) return kMax;
    total += term;
  }
  return total;
}

namespace {

struct Extreme {
  double value = 0.0;
  IndexSet witness;  // empty until set
};

// Per-size extremes found in one slice of the enumeration.
struct SliceResult {
  std::vector<Extreme> lo, hi;
};

// A better value wins; equal values keep the lexicographically smaller set.
bool improves(const Extreme& cur, double value, const IndexSet& set,
              bool want_max) {
  if (cur.witness.empty()) return true;
  if (want_max ? value > cur.value : value < cur.value) return true;
  return value == cur.value && set < cur.witness;
}

// Enumerates all subsets of sizes 1..m_max whose first element is in
// `firsts`, in lexicographic order.
SliceResult enumerate(const Matrix& C, int m_max, const std::vector<int>& firsts) {
  const int p = static_cast<int>(C.rows());
  SliceResult out;
  out.lo.resize(m_max);
  out.hi.resize(m_max);
  std::vector<Eigen::SelfAdjointEigenSolver<Matrix>> solvers;
  for (int k = 1; k <= m_max; ++k) solvers.emplace_back(k);
  std::vector<Matrix> subs;
  for (int k = 1; k <= m_max; ++k) subs.emplace_back(k, k);

  for (int first : firsts) {
    for (int k = 1; k <= m_max && first + k <= p; ++k) {
      IndexSet idx(k);
      idx[0] = first;
      for (int i = 1; i < k; ++i) idx[i] = first + i;
      Matrix& sub = subs[k - 1];
      auto& solver = solvers[k - 1];
      while (true) {
        for (int j = 0; j < k; ++j)
          for (int i = 0; i < k; ++i) sub(i, j) = C(idx[i], idx[j]);
        double lo, hi;
        if (k == 1) {
          lo = hi = sub(0, 0);
        } else {
          solver.compute(sub, Eigen::EigenvaluesOnly);
          lo = solver.eigenvalues()(0);
          hi = solver.eigenvalues()(k - 1);
        }
        if (improves(out.lo[k - 1], lo, idx, false))
          out.lo[k - 1] = {lo, idx};
        if (improves(out.hi[k - 1], hi, idx, true))
          out.hi[k - 1] = {hi, idx};
        // Next combination with idx[0] fixed.
        int i = k - 1;
        while (i >= 1 && idx[i] == p - k + i) --i;
        if (i < 1) break;
        ++idx[i];
        for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
      }
    }
  }
  return out;
}

double clamp_nonneg(double v) { return v < 0.0 ? 0.0 : v; }

// Largest eigenvalue and eigenvector of C restricted to S.
double exact_top(const Matrix& C, const IndexSet& S, Vector* vec) {
  const int k = static_cast<int>(S.size());
  Matrix sub(k, k);
  for (int j = 0; j < k; ++j)
    for (int i = 0; i < k; ++i) sub(i, j) = C(S[i], S[j]);
  Eigen::SelfAdjointEigenSolver<Matrix> es(
      sub, vec ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
  if (vec) *vec = es.eigenvectors().col(k - 1);
  return es.eigenvalues()(k - 1);
}

double rayleigh(const Matrix& C, const IndexSet& S, const Vector& v) {
  double num = 0.0;
  for (std::size_t j = 0; j < S.size(); ++j) {
    double row = 0.0;
    for (std::size_t i = 0; i < S.size(); ++i) row += C(S[i], S[j]) * v(i);
    num += v(j) * row;
  }
  return num / v.squaredNorm();
}

constexpr int kPolishLimit = 400;

struct Found {
  double value = -std::numeric_limits<double>::infinity();
  IndexSet set;
};

void consider(Found& best, double value, IndexSet set) {
  std::sort(set.begin(), set.end());
  if (value > best.value || (value == best.value && set < best.set))
    best = {value, std::move(set)};
}

// Lower bound on the m-sparse largest eigenvalue of a PSD matrix A, with the
// attaining subset. Greedy forward selection plus truncated power iteration
// from seeded random starts.
Found heuristic_top(const Matrix& A, int m, const SparseEigOptions& opt,
                    std::uint64_t stream) {
  const int p = static_cast<int>(A.rows());
  Found best;
  if (m >= p) {
    IndexSet all(p);
    std::iota(all.begin(), all.end(), 0);
    consider(best, exact_top(A, all, nullptr), all);
    return best;
  }

  // Greedy: add the column whose 2x2 combination with the current vector
  // gives the largest Rayleigh quotient.
  {
    int start = 0;
    for (int k = 1; k < p; ++k)
      if (A(k, k) > A(start, start)) start = k;
    IndexSet S{start};
    std::vector<char> in(p, 0);
    in[start] = 1;
    Vector v = Vector::Ones(1);
    double mu = A(start, start);
    while (static_cast<int>(S.size()) < m) {
      Vector c = Vector::Zero(p);
      for (std::size_t i = 0; i < S.size(); ++i) c += v(i) * A.col(S[i]);
      int pick = -1;
      double top = -std::numeric_limits<double>::infinity();
      for (int k = 0; k < p; ++k) {
        if (in[k]) continue;
        double half = 0.5 * (mu - A(k, k));
        double t = 0.5 * (mu + A(k, k)) + std::hypot(half, c(k));
        if (t > top) {
          top = t;
          pick = k;
        }
      }
      // Top eigenvector of [[mu, c], [c, a]] gives the mixing angle.
      double a = A(pick, pick), ck = c(pick);
      double cs = 1.0, sn = 0.0;
      if (ck != 0.0) {
        double x = top - a;
        double r = std::hypot(x, ck);
        cs = x / r;
        sn = ck / r;
      } else if (a > mu) {
        cs = 0.0;
        sn = 1.0;
      }
      S.push_back(pick);
      in[pick] = 1;
      Vector w(S.size());
      w.head(S.size() - 1) = cs * v;
      w(S.size() - 1) = sn;
      v = w;
      // A few power steps; for PSD A the quotient does not decrease.
      for (int it = 0; it < 3; ++it) {
        Vector nv = Vector::Zero(S.size());
        for (std::size_t j = 0; j < S.size(); ++j)
          for (std::size_t i = 0; i < S.size(); ++i)
            nv(i) += A(S[i], S[j]) * v(j);
        double nn = nv.norm();
        if (nn == 0.0) break;
        v = nv / nn;
      }
      mu = rayleigh(A, S, v);
    }
    consider(best, mu, S);
  }

  // Truncated power iteration.
  auto truncate = [&](const Vector& full) {
    std::vector<int> order(p);
    std::iota(order.begin(), order.end(), 0);
    std::partial_sort(order.begin(), order.begin() + m, order.end(),
                      [&](int i, int j) {
                        double a = std::abs(full(i)), b = std::abs(full(j));
                        return a > b || (a == b && i < j);
                      });
    IndexSet S(order.begin(), order.begin() + m);
    std::sort(S.begin(), S.end());
    return S;
  };
  for (int r = 0; r < opt.restarts; ++r) {
    Rng rng(derive_seed(opt.seed, stream, static_cast<std::uint64_t>(r)));
    Vector full = rng.normal_vector(p);
    IndexSet S = truncate(full);
    Vector v(m);
    for (int i = 0; i < m; ++i) v(i) = full(S[i]);
    for (int it = 0; it < 20; ++it) {
      full.setZero();
      for (int i = 0; i < m; ++i) full += v(i) * A.col(S[i]);
      IndexSet next = truncate(full);
      Vector nv(m);
      for (int i = 0; i < m; ++i) nv(i) = full(next[i]);
      double nn = nv.norm();
      if (nn == 0.0) break;
      bool same = next == S;
      S = std::move(next);
      v = nv / nn;
      if (same && it >= 5) break;
    }
    consider(best, rayleigh(A, S, v), S);
  }

  if (static_cast<int>(best.set.size()) <= kPolishLimit)
    best.value = std::max(best.value, exact_top(A, best.set, nullptr));
  return best;
}

// Upper bound on the m-sparse smallest eigenvalue by backward deletion:
// repeatedly drop the columns carrying the least weight in the bottom
// eigenvector.
Found backward_bottom(const Matrix& C, int m) {
  const int p = static_cast<int>(C.rows());
  IndexSet S(p);
  std::iota(S.begin(), S.end(), 0);
  const double shift = C.cwiseAbs().rowwise().sum().maxCoeff();
  while (static_cast<int>(S.size()) > m) {
    const int k = static_cast<int>(S.size());
    Matrix sub(k, k);
    for (int j = 0; j < k; ++j)
      for (int i = 0; i < k; ++i) sub(i, j) = C(S[i], S[j]);
    Vector v;
    if (k <= kPolishLimit) {
      Eigen::SelfAdjointEigenSolver<Matrix> es(sub);
      v = es.eigenvectors().col(0);
    } else {
      Matrix B = shift * Matrix::Identity(k, k) - sub;
      v = Vector::Ones(k);
      for (int it = 0; it < 30; ++it) v = (B * v).normalized();
    }
    int remove = std::max(1, (k - m) / 2);
    std::vector<int> order(k);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      return std::abs(v(a)) < std::abs(v(b));
    });
    std::vector<char> drop(k, 0);
    for (int i = 0; i < remove; ++i) drop[order[i]] = 1;
    IndexSet kept;
    for (int i = 0; i < k; ++i)
      if (!drop[i]) kept.push_back(S[i]);
    S = std::move(kept);
  }
  Found out;
  const int k = static_cast<int>(S.size());
  Matrix sub(k, k);
  for (int j = 0; j < k; ++j)
    for (int i = 0; i < k; ++i) sub(i, j) = C(S[i], S[j]);
  if (k <= kPolishLimit) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(sub, Eigen::EigenvaluesOnly);
    out.value = es.eigenvalues()(0);
  } else {
    Matrix B = shift * Matrix::Identity(k, k) - sub;
    Vector v = Vector::Ones(k);
    for (int it = 0; it < 50; ++it) v = (B * v).normalized();
    out.value = v.dot(sub * v);
  }
  out.set = std::move(S);
  return out;
}

SparseEigReport heuristic(const GramMatrix& gram, int m,
                          const SparseEigOptions& opt) {
  const Matrix& C = gram.entries();
  const int p = gram.p();
  SparseEigReport r;
  r.m = m;
  r.exact = false;

  Found top = heuristic_top(C, m, opt, 2 * static_cast<std::uint64_t>(m));
  r.phi_max = top.value;
  r.witness_max = top.set;

  if (gram.sample_size() && m > *gram.sample_size()) {
    // rank(C) <= n < m: every m-subset is singular.
    r.phi_min = 0.0;
    r.witness_min.resize(m);
    std::iota(r.witness_min.begin(), r.witness_min.end(), 0);
  } else {
    const double shift = C.cwiseAbs().rowwise().sum().maxCoeff();
    Matrix B = shift * Matrix::Identity(p, p) - C;
    Found flipped =
        heuristic_top(B, m, opt, 2 * static_cast<std::uint64_t>(m) + 1);
    double via_top = shift - flipped.value;
    IndexSet set = flipped.set;
    if (static_cast<int>(set.size()) <= kPolishLimit) {
      const int k = static_cast<int>(set.size());
      Matrix sub(k, k);
      for (int j = 0; j < k; ++j)
        for (int i = 0; i < k; ++i) sub(i, j) = C(set[i], set[j]);
      Eigen::SelfAdjointEigenSolver<Matrix> es(sub, Eigen::EigenvaluesOnly);
      via_top = std::min(via_top, es.eigenvalues()(0));
    }
    Found back = backward_bottom(C, m);
    if (back.value < via_top || (back.value == via_top && back.set < set)) {
      via_top = back.value;
      set = back.set;
    }
    r.phi_min = via_top;
    r.witness_min = set;
  }
  r.phi_min = clamp_nonneg(r.phi_min);
  r.phi_max = std::max(r.phi_max, r.phi_min);
  return r;
}

bool use_exact(const GramMatrix& C, int m, const SparseEigOptions& opt) {
  std::uint64_t count = subset_count(C.p(), m);
  switch (opt.mode) {
    case EigMode::kExact:
      if (count > opt.enumeration_cap)
        throw CapExceededError(
            "exhaustive sparse eigenvalues need " + std::to_string(count) +
            " subsets (cap " + std::to_string(opt.enumeration_cap) +
            "); use heuristic mode");
      return true;
    case EigMode::kHeuristic:
      return false;
    case EigMode::kAuto:
      return count <= opt.enumeration_cap;
  }
  return false;
}

void check_size(const GramMatrix& C, int m) {
  if (m < 1 || m > C.p())
    throw InputError("sparse eigenvalue size must lie in 1.." +
                     std::to_string(C.p()));
}

}  // namespace

std::vector<SparseEigReport> sparse_eig_profile(const GramMatrix& gram,
                                                int m_max,
                                                const SparseEigOptions& opt) {
  check_size(gram, m_max);
  SparseEigOptions exact = opt;
  exact.mode = EigMode::kExact;
  use_exact(gram, m_max, exact);

  const Matrix& C = gram.entries();
  const int p = gram.p();
  const int threads = std::max(1, std::min(opt.threads, p));
  std::vector<SliceResult> slices(threads);
  {
    std::vector<std::vector<int>> firsts(threads);
    for (int i = 0; i < p; ++i) firsts[i % threads].push_back(i);
    if (threads == 1) {
      slices[0] = enumerate(C, m_max, firsts[0]);
    } else {
      std::vector<std::thread> pool;
      for (int t = 0; t < threads; ++t)
        pool.emplace_back([&, t] { slices[t] = enumerate(C, m_max, firsts[t]); });
      for (auto& th : pool) th.join();
    }
  }
  // Deterministic merge: value first, then lexicographic witness.
  std::vector<Extreme> lo(m_max), hi(m_max);
  for (const auto& s : slices) {
    for (int k = 0; k < m_max; ++k) {
      if (!s.lo[k].witness.empty() &&
          improves(lo[k], s.lo[k].value, s.lo[k].witness, false))
        lo[k] = s.lo[k];
      if (!s.hi[k].witness.empty() &&
          improves(hi[k], s.hi[k].value, s.hi[k].witness, true))
        hi[k] = s.hi[k];
    }
  }
  // Sizes at most m: running extremes; smaller sets win ties.
  std::vector<SparseEigReport> out(m_max);
  Extreme run_lo = lo[0], run_hi = hi[0];
  for (int k = 0; k < m_max; ++k) {
    if (lo[k].value < run_lo.value) run_lo = lo[k];
    if (hi[k].value > run_hi.value) run_hi = hi[k];
    SparseEigReport& r = out[k];
    r.m = k + 1;
    r.exact = true;
    r.phi_min = clamp_nonneg(run_lo.value);
    r.phi_max = run_hi.value;
    r.witness_min = run_lo.witness;
    r.witness_max = run_hi.witness;
  }
  return out;
}

SparseEigReport sparse_eig(const GramMatrix& C, int m,
                           const SparseEigOptions& opt) {
  check_size(C, m);
  if (use_exact(C, m, opt)) return sparse_eig_profile(C, m, opt).back();
  return heuristic(C, m, opt);
}

}  // namespace lassorec
