#include "lassorec/lasso.hpp"

#include <algorithm>
#include <cmath>

#include "lassorec/errors.hpp"

namespace lassorec {

namespace {

double soft_threshold(double z, double t) {
  if (z > t) return z - t;
  if (z < -t) return z + t;
  return 0.0;
}

void require_lambda(double lambda) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda))
    throw InputError("lambda must be finite and nonnegative");
}

std::vector<int> flagged_columns(const DesignMatrix& design) {
  std::vector<int> cols;
  for (auto [i, j] : design.collinear_pairs()) {
    cols.push_back(i);
    cols.push_back(j);
  }
  std::sort(cols.begin(), cols.end());
  cols.erase(std::unique(cols.begin(), cols.end()), cols.end());
  return cols;
}

KktReport certify(const RegressionProblem& problem, double lambda,
                  const Vector& beta, const Vector& residual) {
  KktReport r;
  r.gradient = 2.0 * (problem.X().transpose() * residual);
  const Vector& G = r.gradient;
  double l1 = beta.lpNorm<1>();
  r.objective = residual.squaredNorm() + lambda * l1;

  double viol = 0.0;
  for (int k = 0; k < G.size(); ++k) {
    if (beta(k) > 0)
      viol = std::max(viol, std::abs(G(k) - lambda));
    else if (beta(k) < 0)
      viol = std::max(viol, std::abs(G(k) + lambda));
    else
      viol = std::max(viol, std::abs(G(k)) - lambda);
  }
  r.max_violation = viol;

  if (lambda > 0) {
    double gmax = G.size() ? G.cwiseAbs().maxCoeff() : 0.0;
    double scale = gmax > lambda ? lambda / gmax : 1.0;
    Vector nu = 2.0 * scale * residual;
    double dual = nu.dot(problem.response()) - 0.25 * nu.squaredNorm();
    r.duality_gap = std::max(0.0, r.objective - dual);
  } else {
    r.duality_gap = std::abs(beta.dot(G));
  }

  double tol_abs = std::max(viol, 1e-9 * (1.0 + lambda));
  for (int k = 0; k < G.size(); ++k)
    if (std::abs(G(k)) >= lambda - tol_abs) r.active_set.push_back(k);
  return r;
}

bool converged(const KktReport& r, double lambda, double tol) {
  return r.duality_gap <= tol * (1.0 + r.objective) &&
         r.max_violation <= tol * (1.0 + lambda);
}

}  // namespace

double lambda_max(const RegressionProblem& problem) {
  return 2.0 * (problem.X().transpose() * problem.response())
                   .cwiseAbs()
                   .maxCoeff();
}

double lasso_objective(const RegressionProblem& problem, double lambda,
                       const Vector& beta) {
  return (problem.response() - problem.X() * beta).squaredNorm() +
         lambda * beta.lpNorm<1>();
}

KktReport kkt_check(const RegressionProblem& problem, double lambda,
                    const Vector& beta) {
  Vector residual = problem.response() - problem.X() * beta;
  return certify(problem, lambda, beta, residual);
}

KktReport kkt_check(const RegressionProblem& problem, const LassoFit& fit) {
  return kkt_check(problem, fit.lambda, fit.coefficients);
}

LassoFit make_fit(const RegressionProblem& problem, double lambda,
                  Vector beta) {
  require_lambda(lambda);
  LassoFit fit;
  fit.lambda = lambda;
  fit.residual = problem.response() - problem.X() * beta;
  fit.kkt = certify(problem, lambda, beta, fit.residual);
  fit.coefficients = std::move(beta);
  return fit;
}

double theory_lambda(double sigma, double e, int n, int p, double multiplier) {
  return multiplier * sigma * e *
         std::sqrt(static_cast<double>(n) * std::log(static_cast<double>(p)));
}

LassoFit solve_at(const RegressionProblem& problem, double lambda,
                  const SolveOptions& options) {
  require_lambda(lambda);
  if (problem.design().flagged() && !options.force)
    throw DegeneratePathError("design has collinear columns; use force",
                              flagged_columns(problem.design()));
  const Matrix& X = problem.X();
  const Vector& norms = problem.design().column_sq_norms();
  const int p = problem.p();
  const double half = 0.5 * lambda;

  Vector beta = Vector::Zero(p);
  if (options.warm_start) {
    if (options.warm_start->size() != p)
      throw InputError("warm start length differs from p");
    beta = *options.warm_start;
  }
  Vector residual = problem.response() - X * beta;

  auto update = [&](int k) {
    double old = beta(k);
    double z = X.col(k).dot(residual) + norms(k) * old;
    double fresh = soft_threshold(z, half) / norms(k);
    if (fresh != old) {
      residual.noalias() -= (fresh - old) * X.col(k);
      beta(k) = fresh;
    }
    return std::abs(fresh - old) * std::sqrt(norms(k));
  };

  KktReport report;
  int sweep = 0;
  while (true) {
    for (int k = 0; k < p; ++k) update(k);
    ++sweep;
    residual = problem.response() - X * beta;
    report = certify(problem, lambda, beta, residual);
    if (converged(report, lambda, options.tol)) break;
    if (sweep >= options.max_sweeps)
      throw ConvergenceError(
          "coordinate descent did not converge; last gap " +
              std::to_string(report.duality_gap),
          report.duality_gap, sweep);

    // Inner passes over the current support only.
    IndexSet supp = support(beta);
    double target = 1e-3 * options.tol * std::sqrt(1.0 + report.objective);
    for (int inner = 0; inner < 1000 && !supp.empty(); ++inner) {
      double change = 0.0;
      for (int k : supp) change = std::max(change, update(k));
      if (change <= target) break;
    }
  }

  LassoFit fit;
  fit.lambda = lambda;
  fit.coefficients = std::move(beta);
  fit.residual = std::move(residual);
  fit.kkt = std::move(report);
  fit.sweeps = sweep;
  return fit;
}

std::vector<LassoFit> solve_grid(const RegressionProblem& problem,
                                 std::span<const double> lambdas,
                                 const SolveOptions& options) {
  std::vector<LassoFit> fits;
  fits.reserve(lambdas.size());
  SolveOptions opts = options;
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    if (i > 0 && lambdas[i] > lambdas[i - 1])
      throw InputError("lambda grid must be nonincreasing");
    fits.push_back(solve_at(problem, lambdas[i], opts));
    opts.warm_start = fits.back().coefficients;
  }
  return fits;
}

}  // namespace lassorec
