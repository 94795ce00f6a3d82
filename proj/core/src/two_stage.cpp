#include "lassorec/two_stage.hpp"

#include <cmath>

#include "lassorec/errors.hpp"

namespace lassorec {

ThresholdRule::ThresholdRule(double sigma, double t, int n, int p)
    : sigma_(sigma), t_(t), n_(n), p_(p) {
  if (!(sigma > 0) || !std::isfinite(sigma))
    throw InputError("threshold sigma must be positive");
  if (!(t > 0) || !std::isfinite(t))
    throw InputError("threshold t must be positive");
  if (n < 1 || p < 1) throw InputError("threshold needs n >= 1 and p >= 1");
  cutoff_ = sigma_ * t_ * std::sqrt(std::log(static_cast<double>(p_)) / n_);
}

Vector hard_threshold(const Vector& fit, const ThresholdRule& rule) {
  Vector out = fit;
  const double c = rule.cutoff();
  for (Eigen::Index k = 0; k < out.size(); ++k)
    if (!(std::abs(out(k)) >= c)) out(k) = 0.0;
  return out;
}

bool sign_consistent(const Vector& estimate, const Vector& truth) {
  if (estimate.size() != truth.size())
    throw InputError("sign comparison needs equal lengths");
  return sign_of(estimate) == sign_of(truth);
}

TwoStepResult two_step_recover(const RegressionProblem& problem, double lambda,
                               const ThresholdRule& rule,
                               const SolveOptions& options) {
  TwoStepResult r;
  r.lambda = lambda;
  r.cutoff = rule.cutoff();
  LassoFit fit = solve_at(problem, lambda, options);
  r.lasso = fit.coefficients;
  r.thresholded = hard_threshold(r.lasso, rule);
  r.support_before = support(r.lasso);
  r.support_after = support(r.thresholded);
  if (problem.truth()) {
    r.lasso_sign_consistent = sign_consistent(r.lasso, problem.truth()->beta());
    r.recovered = sign_consistent(r.thresholded, problem.truth()->beta());
  }
  return r;
}

std::optional<double> path_sign_consistent(const LassoPath& path,
                                           const Vector& truth) {
  const SignPattern target = sign_of(truth);
  if (target == sign_of(Vector::Zero(truth.size()))) return path.lambda_max();
  for (const auto& seg : path.segments()) {
    double mid = 0.5 * (seg.lambda_high + seg.lambda_low);
    for (double l : {mid, seg.lambda_high, seg.lambda_low})
      if (sign_of(seg.at(l)) == target) return l;
  }
  return std::nullopt;
}

}  // namespace lassorec
