#include "lassorec/denoised.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lassorec/diagnostics.hpp"
#include "lassorec/errors.hpp"

namespace lassorec {

namespace {

const TruthSpec& require_truth(const RegressionProblem& problem) {
  if (!problem.truth()) throw InputError("problem carries no true coefficients");
  return *problem.truth();
}

const Vector& require_noise(const RegressionProblem& problem) {
  if (!problem.noise()) throw InputError("problem carries no noise vector");
  return *problem.noise();
}

RegressionProblem noiseless(const RegressionProblem& problem) {
  const TruthSpec& truth = require_truth(problem);
  return RegressionProblem(problem.design_ptr(), problem.X() * truth.beta(),
                           truth, Vector::Zero(problem.n()));
}

Vector lasso_at(const RegressionProblem& problem, double lambda, bool force) {
  PathOptions opts;
  opts.force = force;
  return lasso_path(problem, lambda, opts).coefficients_at(lambda);
}

}  // namespace

DenoisedProblem denoise(const RegressionProblem& problem, double xi) {
  const TruthSpec& truth = require_truth(problem);
  const Vector& eps = require_noise(problem);
  if (!(xi >= 0.0 && xi <= 1.0)) throw InputError("xi must lie in [0, 1]");
  if (xi == 1.0) return {xi, problem};
  Vector scaled = xi * eps;
  return {xi, RegressionProblem::simulate(problem.design_ptr(), truth,
                                          std::move(scaled))};
}

Vector restricted_ols_noise(const DesignMatrix& design, const Vector& noise,
                            const IndexSet& M) {
  Vector theta = Vector::Zero(design.p());
  if (M.empty()) return theta;
  if (static_cast<int>(M.size()) > design.n())
    throw SingularSystemError("more columns than samples", M);
  Matrix XM(design.n(), M.size());
  for (std::size_t i = 0; i < M.size(); ++i)
    XM.col(i) = design.entries().col(M[i]);
  Eigen::ColPivHouseholderQR<Matrix> qr(XM);
  qr.setThreshold(1e-10);
  if (qr.rank() < static_cast<Eigen::Index>(M.size()))
    throw SingularSystemError("restricted design is rank deficient", M);
  Vector sol = qr.solve(noise);
  for (std::size_t i = 0; i < M.size(); ++i) theta(M[i]) = sol(i);
  return theta;
}

XiPath::XiPath(double lambda, std::vector<XiInterval> intervals)
    : lambda_(lambda), intervals_(std::move(intervals)) {}

std::vector<double> XiPath::breakpoints() const {
  std::vector<double> out;
  for (const auto& iv : intervals_) out.push_back(iv.xi_start);
  out.push_back(1.0);
  return out;
}

Vector XiPath::evaluate(double xi) const {
  if (!(xi >= 0.0 && xi <= 1.0)) throw InputError("xi must lie in [0, 1]");
  auto it = std::lower_bound(
      intervals_.begin(), intervals_.end(), xi,
      [](const XiInterval& iv, double x) { return iv.xi_end < x; });
  if (it == intervals_.end()) --it;
  return it->at(xi);
}

double XiPath::continuity_gap() const {
  double gap = 0.0;
  for (std::size_t j = 1; j < intervals_.size(); ++j) {
    const auto& a = intervals_[j - 1];
    const auto& b = intervals_[j];
    gap = std::max(gap, (a.at(b.xi_start) - b.anchor).cwiseAbs().maxCoeff());
  }
  return gap;
}

XiPath xi_path(const RegressionProblem& problem, double lambda,
               const XiPathOptions& options) {
  const TruthSpec& truth = require_truth(problem);
  const Vector& eps = require_noise(problem);
  if (!(lambda > 0.0) || !std::isfinite(lambda))
    throw InputError("lambda must be positive");
  const DesignMatrix& design = problem.design();
  const Matrix& X = design.entries();
  const int n = problem.n(), p = problem.p();
  const int max_events = options.max_events > 0 ? options.max_events
                                                : 50 * (n + p);
  const double merge_tol = 1e-12;

  RegressionProblem base = noiseless(problem);
  Vector beta = lasso_at(base, lambda, options.force);
  const Vector signal = X * truth.beta();

  auto gradient_at = [&](double xi, const Vector& b) -> Vector {
    return 2.0 * (X.transpose() * (signal + xi * eps - X * b));
  };

  Vector G = gradient_at(0.0, beta);
  IndexSet active = support(beta);

  std::vector<XiInterval> intervals;
  double xi = 0.0;
  int events = 0;
  int just_dropped = -1;
  while (true) {
    Vector theta = restricted_ols_noise(design, eps, active);
    Vector rate = 2.0 * (X.transpose() * (eps - X * theta));
    std::vector<char> in_active(p, 0);
    for (int k : active) in_active[k] = 1;

    struct Event {
      double t;
      int column;
      bool join;
    };
    std::vector<Event> cands;
    for (int k = 0; k < p; ++k) {
      if (in_active[k] || k == just_dropped) continue;
      double d = rate(k);
      if (d > 0)
        cands.push_back({std::max(0.0, (lambda - G(k)) / d), k, true});
      else if (d < 0)
        cands.push_back({std::max(0.0, (-lambda - G(k)) / d), k, true});
    }
    for (int k : active) {
      if (beta(k) == 0.0 || theta(k) == 0.0) continue;
      double t = -beta(k) / theta(k);
      if (t > 0) cands.push_back({t, k, false});
    }
    double remaining = 1.0 - xi;
    double best = remaining;
    for (const auto& c : cands) best = std::min(best, c.t);
    bool finish = best >= remaining;
    double step = finish ? remaining : best;

    if (step > merge_tol || finish) {
      XiInterval iv;
      iv.xi_start = xi;
      iv.xi_end = finish ? 1.0 : xi + step;
      iv.active_set = active;
      iv.theta = theta;
      iv.anchor = beta;
      intervals.push_back(std::move(iv));
    }
    if (finish) break;
    if (++events > max_events)
      throw DegeneratePathError("xi path exceeded the event limit", active);

    beta += step * theta;
    xi += step;
    std::vector<Event> fired;
    for (const auto& c : cands)
      if (c.t <= best + merge_tol) fired.push_back(c);
    std::sort(fired.begin(), fired.end(),
              [](const Event& a, const Event& b) { return a.column < b.column; });
    just_dropped = -1;
    for (const auto& e : fired) {
      if (e.join) {
        active.insert(std::lower_bound(active.begin(), active.end(), e.column),
                      e.column);
      } else {
        beta(e.column) = 0.0;
        active.erase(std::find(active.begin(), active.end(), e.column));
        just_dropped = e.column;
      }
    }
    G = gradient_at(xi, beta);
  }
  return XiPath(lambda, std::move(intervals));
}

VarianceBoundReport variance_bound_check(const XiPath& path,
                                         const DesignMatrix& design,
                                         const Vector& noise) {
  VarianceBoundReport r;
  const auto& ivs = path.intervals();
  if (ivs.empty()) return r;
  const Vector origin = ivs.front().anchor;
  // The shift norm is convex in xi on each interval, so its sup sits at an
  // interval endpoint.
  for (const auto& iv : ivs) {
    for (double xi : {iv.xi_start, iv.xi_end}) {
      double d = (iv.at(xi) - origin).norm();
      if (d > r.sup_shift) {
        r.sup_shift = d;
        r.sup_xi = xi;
      }
    }
    r.interval_sizes.push_back(static_cast<int>(iv.active_set.size()));
    r.max_active = std::max(r.max_active, static_cast<int>(iv.active_set.size()));
    double tn = restricted_ols_noise(design, noise, iv.active_set).norm();
    r.max_theta_norm = std::max(r.max_theta_norm, tn);
  }
  r.inequality_holds =
      r.sup_shift <= r.max_theta_norm * (1.0 + 1e-9) + 1e-12;
  return r;
}

RestrictedOlsReport restricted_ols_report(const XiPath& path,
                                          const DesignMatrix& design,
                                          const Vector& noise, double sigma) {
  RestrictedOlsReport r;
  for (const auto& iv : path.intervals()) {
    r.m = std::max(r.m, static_cast<int>(iv.active_set.size()));
    r.realized = std::max(
        r.realized,
        restricted_ols_noise(design, noise, iv.active_set).squaredNorm());
  }
  if (r.m == 0) return r;
  SparseEigReport eig =
      sparse_eig(build_gram(design), r.m, SparseEigOptions{EigMode::kAuto});
  r.phi_min = eig.phi_min;
  r.phi_exact = eig.exact;
  const double n = design.n(), p = design.p();
  r.bound = r.phi_min > 0
                ? 2.0 * std::log(p) / n * r.m / (r.phi_min * r.phi_min) *
                      sigma * sigma
                : std::numeric_limits<double>::infinity();
  return r;
}

double bias_objective(const DesignMatrix& design, const Vector& beta,
                      double lambda, const Vector& zeta) {
  double value = (design.entries() * zeta).squaredNorm();
  for (int k = 0; k < beta.size(); ++k) {
    if (beta(k) == 0.0)
      value += lambda * std::abs(zeta(k));
    else
      value += lambda * (std::abs(beta(k) + zeta(k)) - std::abs(beta(k)));
  }
  return value;
}

BiasReport bias_report(const RegressionProblem& problem, double lambda,
                       double multiplier, const BiasOptions& options) {
  const TruthSpec& truth = require_truth(problem);
  if (!(lambda >= 0.0)) throw InputError("lambda must be nonnegative");
  if (!(multiplier > 0.0)) throw InputError("multiplier must be positive");
  const int p = problem.p(), n = problem.n();
  const int s = truth.sparsity();

  BiasReport r;
  r.multiplier = multiplier;
  r.phi_size = std::min(
      p, std::max(1, static_cast<int>(std::ceil(multiplier * s - 1e-12))));
  SparseEigOptions eo{EigMode::kAuto};
  eo.enumeration_cap = options.enumeration_cap;
  GramMatrix C = build_gram(problem.design());
  SparseEigReport eig = sparse_eig(C, r.phi_size, eo);
  r.phi_min = eig.phi_min;
  r.phi_exact = eig.exact;
  if (!(r.phi_min > 1e-12 * std::max(1.0, C.entries().diagonal().maxCoeff())))
    throw BoundUndefinedError("sparse minimal eigenvalue of size " +
                              std::to_string(r.phi_size) + " vanishes");

  RegressionProblem base = noiseless(problem);
  Vector fitted = lasso_at(base, lambda, false);
  r.gamma = fitted - truth.beta();
  r.l2_norm = r.gamma.norm();
  r.l1_norm = r.gamma.lpNorm<1>();
  r.bound_rhs = 17.5 * (lambda / n) * std::sqrt(static_cast<double>(s)) /
                r.phi_min;
  r.bound_holds = r.l2_norm <= r.bound_rhs;

  const double slack = options.tol * (1.0 + r.l1_norm);
  r.l1_rhs = 2.0 * std::sqrt(static_cast<double>(s)) * r.l2_norm;
  r.l1_l2_holds = r.l1_norm <= r.l1_rhs + slack;
  for (int k = 0; k < p; ++k) {
    if (truth.beta()(k) == 0.0)
      r.off_support_l1 += std::abs(r.gamma(k));
    else
      r.on_support_l1 += std::abs(r.gamma(k));
  }
  r.cone_holds = r.off_support_l1 <= r.on_support_l1 + slack;
  r.objective_value = bias_objective(problem.design(), truth.beta(), lambda,
                                     r.gamma);
  return r;
}

}  // namespace lassorec
