#pragma once

// De-noised responses Y(xi) = X beta + xi * eps and the Lasso path in xi at
// fixed lambda. Requires problems that carry their truth and noise.

#include <optional>
#include <vector>

#include "lassorec/lasso.hpp"
#include "lassorec/model.hpp"

namespace lassorec {

struct DenoisedProblem {
  double xi = 0.0;
  RegressionProblem problem;
};

DenoisedProblem denoise(const RegressionProblem& problem, double xi);

// (X_M^T X_M)^{-1} X_M^T eps embedded in p coordinates.
Vector restricted_ols_noise(const DesignMatrix& design, const Vector& noise,
                            const IndexSet& M);

// beta(xi) = anchor + (xi - xi_start) * theta on [xi_start, xi_end].
struct XiInterval {
  double xi_start = 0.0;
  double xi_end = 1.0;
  IndexSet active_set;
  Vector theta;
  Vector anchor;

  Vector at(double xi) const { return anchor + (xi - xi_start) * theta; }
};

class XiPath {
 public:
  XiPath(double lambda, std::vector<XiInterval> intervals);

  double lambda() const { return lambda_; }
  const std::vector<XiInterval>& intervals() const { return intervals_; }
  std::vector<double> breakpoints() const;
  Vector evaluate(double xi) const;
  // Largest l_inf jump between consecutive intervals at their shared xi.
  double continuity_gap() const;

 private:
  double lambda_;
  std::vector<XiInterval> intervals_;
};

struct XiPathOptions {
  // 0 picks 50 * (n + p).
  int max_events = 0;
  bool force = false;
};

XiPath xi_path(const RegressionProblem& problem, double lambda,
               const XiPathOptions& options = {});

struct VarianceBoundReport {
  double sup_shift = 0.0;  // sup over xi of ||beta(0) - beta(xi)||_2
  double sup_xi = 0.0;
  std::vector<int> interval_sizes;
  double max_theta_norm = 0.0;  // over visited active sets
  int max_active = 0;
  bool inequality_holds = true;
};

// `noise` recomputes the restricted OLS directions on every visited set
// instead of trusting the stored interval directions.
VarianceBoundReport variance_bound_check(const XiPath& path,
                                         const DesignMatrix& design,
                                         const Vector& noise);

// Realized max ||theta^M||^2 over visited sets against
// 2 (log p / n) * m / phi_min(m)^2 * sigma^2. Informational only.
struct RestrictedOlsReport {
  double realized = 0.0;
  double bound = 0.0;
  int m = 0;
  double phi_min = 0.0;
  bool phi_exact = false;
};

RestrictedOlsReport restricted_ols_report(const XiPath& path,
                                          const DesignMatrix& design,
                                          const Vector& noise, double sigma);

// n z^T C z + lambda sum_{K^c} |z_k| + lambda sum_K (|b_k + z_k| - |b_k|).
double bias_objective(const DesignMatrix& design, const Vector& beta,
                      double lambda, const Vector& zeta);

struct BiasReport {
  Vector gamma;
  double l2_norm = 0.0;
  double l1_norm = 0.0;
  double multiplier = 0.0;
  int phi_size = 0;  // ceil(e s), capped at p
  double phi_min = 0.0;
  bool phi_exact = false;
  double bound_rhs = 0.0;  // 17.5 (lambda / n) sqrt(s) / phi_min
  bool bound_holds = false;
  double l1_rhs = 0.0;  // 2 sqrt(s) ||gamma||_2
  bool l1_l2_holds = false;
  double off_support_l1 = 0.0;
  double on_support_l1 = 0.0;
  bool cone_holds = false;
  double objective_value = 0.0;  // bias_objective at gamma, must be <= 0
};

struct BiasOptions {
  double tol = 1e-9;
  // Exhaustive sparse eigenvalues when the subset count allows.
  std::uint64_t enumeration_cap = 2'000'000;
};

BiasReport bias_report(const RegressionProblem& problem, double lambda,
                       double multiplier, const BiasOptions& options = {});

}  // namespace lassorec
