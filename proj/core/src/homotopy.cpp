#include <algorithm>
#include <cmath>
#include <limits>

#include "cholesky.hpp"
#include "lassorec/errors.hpp"
#include "lassorec/lasso.hpp"

namespace lassorec {

LassoPath::LassoPath(int p, double lambda_max, double lambda_min,
                     std::vector<PathSegment> segments)
    : p_(p),
      lambda_max_(lambda_max),
      lambda_min_(lambda_min),
      segments_(std::move(segments)) {}

const PathSegment* LassoPath::segment_at(double lambda) const {
  if (lambda >= lambda_max_ || segments_.empty()) return nullptr;
  if (lambda < lambda_min_)
    throw InputError("lambda below the computed path range");
  // Segments are ordered by decreasing lambda.
  auto it = std::lower_bound(
      segments_.begin(), segments_.end(), lambda,
      [](const PathSegment& s, double l) { return s.lambda_low > l; });
  if (it == segments_.end()) return &segments_.back();
  return &*it;
}

Vector LassoPath::coefficients_at(double lambda) const {
  const PathSegment* seg = segment_at(lambda);
  if (!seg) return Vector::Zero(p_);
  return seg->at(lambda);
}

int LassoPath::num_events() const {
  int count = 0;
  for (const auto& s : segments_) count += static_cast<int>(s.events.size());
  return count;
}

namespace {

struct Candidate {
  double step = std::numeric_limits<double>::infinity();
  int column = -1;
  EventKind kind = EventKind::kJoin;
};

class Homotopy {
 public:
  Homotopy(const RegressionProblem& problem, double lambda_min,
           const PathOptions& options)
      : X_(problem.X()),
        Y_(problem.response()),
        norms_(problem.design().column_sq_norms()),
        n_(problem.n()),
        p_(problem.p()),
        lambda_min_(lambda_min),
        force_(options.force),
        max_events_(options.max_events > 0 ? options.max_events
                                            : 50 * (problem.n() + problem.p())),
        chol_(std::min(problem.n(), problem.p())) {}

  LassoPath run() {
    beta_ = Vector::Zero(p_);
    refresh();
    const double lmax = gradient_.cwiseAbs().maxCoeff();
    lambda_ = lmax;
    tol_ = 1e-12 * std::max(lmax, std::numeric_limits<double>::min());
    guard_ = 1e-11 * lmax;
    std::vector<PathSegment> segments;
    if (lmax <= lambda_min_ || lmax == 0.0)
      return LassoPath(p_, lmax, lambda_min_, std::move(segments));

    std::vector<PathEvent> pending;
    int events = 0;
    while (true) {
      direction();
      std::vector<Candidate> cands = candidates();
      double end = lambda_ - lambda_min_;
      double best = end;
      for (const auto& c : cands) best = std::min(best, c.step);

      // Ties: every candidate within tol of the best step.
      Candidate chosen;
      int within = 0;
      for (const auto& c : cands) {
        if (c.step > best + tol_) continue;
        ++within;
        if (chosen.column < 0 || c.column < chosen.column) chosen = c;
      }
      bool finish = chosen.column < 0 || end <= best;

      double step = finish ? end : best;
      if (step > tol_ || (finish && step > 0)) {
        PathSegment seg;
        seg.lambda_high = lambda_;
        seg.lambda_low = finish ? lambda_min_ : lambda_ - step;
        seg.active_set = active_;
        std::sort(seg.active_set.begin(), seg.active_set.end());
        seg.direction = Vector::Zero(p_);
        for (std::size_t i = 0; i < active_.size(); ++i)
          seg.direction(active_[i]) = w_(i);
        seg.anchor = beta_;
        seg.events = std::move(pending);
        pending.clear();
        segments.push_back(std::move(seg));
      }
      if (finish) break;

      for (std::size_t i = 0; i < active_.size(); ++i)
        beta_(active_[i]) += step * w_(i);
      lambda_ -= step;
      if (++events > max_events_)
        throw DegeneratePathError("path exceeded the event limit", active_);

      pending.push_back({chosen.column, chosen.kind, lambda_, within > 1});
      refresh();
      if (chosen.kind == EventKind::kJoin) {
        join(chosen.column);
      } else {
        drop(chosen.column);
        refresh();
      }
    }
    if (!segments.empty()) segments.back().lambda_low = lambda_min_;
    return LassoPath(p_, lmax, lambda_min_, std::move(segments));
  }

 private:
  void refresh() {
    residual_ = Y_ - X_ * beta_;
    gradient_ = 2.0 * (X_.transpose() * residual_);
  }

  // w_A = 1/2 (X_A^T X_A)^{-1} s_A.
  void direction() {
    const int k = static_cast<int>(active_.size());
    Vector s(k);
    for (int i = 0; i < k; ++i) s(i) = signs_[i];
    if (degenerate_) {
      Matrix XA(n_, k);
      for (int i = 0; i < k; ++i) XA.col(i) = X_.col(active_[i]);
      Matrix gram = XA.transpose() * XA;
      w_ = 0.5 * Eigen::CompleteOrthogonalDecomposition<Matrix>(gram).solve(s);
    } else {
      w_ = 0.5 * chol_.solve(s);
    }
    u_ = Vector::Zero(n_);
    for (int i = 0; i < k; ++i) u_.noalias() += w_(i) * X_.col(active_[i]);
    rate_ = 2.0 * (X_.transpose() * u_);
  }

  std::vector<Candidate> candidates() const {
    std::vector<Candidate> out;
    std::vector<char> in_active(p_, 0);
    for (int k : active_) in_active[k] = 1;
    auto accept = [&](double h) {
      // Events that would land in the roundoff band near zero are spurious.
      return std::isfinite(h) && lambda_ - h > guard_;
    };
    for (int k = 0; k < p_; ++k) {
      if (in_active[k] || k == just_dropped_) continue;
      double g = gradient_(k), a = rate_(k);
      double h = std::numeric_limits<double>::infinity();
      if (1.0 - a > 1e-10) h = std::min(h, std::max(0.0, (lambda_ - g) / (1.0 - a)));
      if (1.0 + a > 1e-10) h = std::min(h, std::max(0.0, (lambda_ + g) / (1.0 + a)));
      if (accept(h)) out.push_back({h, k, EventKind::kJoin});
    }
    for (std::size_t i = 0; i < active_.size(); ++i) {
      int k = active_[i];
      if (beta_(k) == 0.0 || w_(i) == 0.0) continue;
      double h = -beta_(k) / w_(i);
      if (h > 0 && accept(h)) out.push_back({h, k, EventKind::kDrop});
    }
    return out;
  }

  void join(int k) {
    just_dropped_ = -1;
    double g = gradient_(k);
    int sign = g > 0 ? 1 : -1;
    if (!degenerate_) {
      Vector cross(active_.size());
      for (std::size_t i = 0; i < active_.size(); ++i)
        cross(i) = X_.col(active_[i]).dot(X_.col(k));
      if (!chol_.insert(cross, norms_(k))) {
        IndexSet cols = active_;
        cols.push_back(k);
        std::sort(cols.begin(), cols.end());
        if (!force_)
          throw DegeneratePathError("singular active-set system", cols);
        degenerate_ = true;
      }
    }
    active_.push_back(k);
    signs_.push_back(sign);
  }

  void drop(int k) {
    auto it = std::find(active_.begin(), active_.end(), k);
    int pos = static_cast<int>(it - active_.begin());
    beta_(k) = 0.0;
    active_.erase(it);
    signs_.erase(signs_.begin() + pos);
    if (!degenerate_) chol_.remove(pos);
    just_dropped_ = k;
  }

  const Matrix& X_;
  const Vector& Y_;
  const Vector& norms_;
  int n_, p_;
  double lambda_min_;
  bool force_;
  int max_events_;

  detail::IncrementalCholesky chol_;
  bool degenerate_ = false;
  std::vector<int> active_;  // insertion order, matches chol_
  std::vector<int> signs_;
  int just_dropped_ = -1;
  double lambda_ = 0.0, tol_ = 0.0, guard_ = 0.0;
  Vector beta_, residual_, gradient_, w_, u_, rate_;
};

}  // namespace

LassoPath lasso_path(const RegressionProblem& problem, double lambda_min,
                     const PathOptions& options) {
  if (!(lambda_min >= 0.0) || !std::isfinite(lambda_min))
    throw InputError("lambda_min must be finite and nonnegative");
  if (problem.design().flagged() && !options.force) {
    std::vector<int> cols;
    for (auto [i, j] : problem.design().collinear_pairs()) {
      cols.push_back(i);
      cols.push_back(j);
    }
    std::sort(cols.begin(), cols.end());
    cols.erase(std::unique(cols.begin(), cols.end()), cols.end());
    throw DegeneratePathError("design has collinear columns; use force", cols);
  }
  return Homotopy(problem, lambda_min, options).run();
}

}  // namespace lassorec
