#pragma once

// Lasso: minimize ||Y - X b||^2 + lambda ||b||_1.
//
// Gradient convention: G = 2 X^T R with R = Y - X b. At a solution
// G_k = lambda * sign(b_k) on the support and |G_k| <= lambda elsewhere.

#include <optional>
#include <span>
#include <vector>

#include "lassorec/model.hpp"

namespace lassorec {

struct KktReport {
  Vector gradient;
  double max_violation = 0.0;
  IndexSet active_set;
  double duality_gap = 0.0;
  double objective = 0.0;
};

struct LassoFit {
  double lambda = 0.0;
  Vector coefficients;
  Vector residual;
  KktReport kkt;
  int sweeps = 0;
};

struct SolveOptions {
  double tol = 1e-8;
  int max_sweeps = 100000;
  bool force = false;
  std::optional<Vector> warm_start;
};

double lambda_max(const RegressionProblem& problem);
double lasso_objective(const RegressionProblem& problem, double lambda,
                       const Vector& beta);

// Coordinate descent stopped by the duality gap and KKT violation.
LassoFit solve_at(const RegressionProblem& problem, double lambda,
                  const SolveOptions& options = {});

// Warm-started solves; lambdas must be nonincreasing.
std::vector<LassoFit> solve_grid(const RegressionProblem& problem,
                                 std::span<const double> lambdas,
                                 const SolveOptions& options = {});

KktReport kkt_check(const RegressionProblem& problem, const LassoFit& fit);
KktReport kkt_check(const RegressionProblem& problem, double lambda,
                    const Vector& beta);
// Packages coefficients (e.g. from a path) as a certified fit.
LassoFit make_fit(const RegressionProblem& problem, double lambda, Vector beta);

// multiplier * sigma * e * sqrt(n log p).
double theory_lambda(double sigma, double e, int n, int p,
                     double multiplier = 2.0);

enum class EventKind { kJoin, kDrop };

struct PathEvent {
  int column = -1;
  EventKind kind = EventKind::kJoin;
  double lambda = 0.0;
  bool tie = false;
};

// beta(lambda) = anchor + (lambda_high - lambda) * direction on
// [lambda_low, lambda_high]. `events` are the joins and drops at
// lambda_high that produced active_set.
struct PathSegment {
  double lambda_high = 0.0;
  double lambda_low = 0.0;
  IndexSet active_set;
  Vector direction;
  Vector anchor;
  std::vector<PathEvent> events;

  Vector at(double lambda) const {
    return anchor + (lambda_high - lambda) * direction;
  }
};

class LassoPath {
 public:
  LassoPath(int p, double lambda_max, double lambda_min,
            std::vector<PathSegment> segments);

  int p() const { return p_; }
  double lambda_max() const { return lambda_max_; }
  double lambda_min() const { return lambda_min_; }
  const std::vector<PathSegment>& segments() const { return segments_; }

  // Segment containing lambda, or nullptr when lambda >= lambda_max.
  const PathSegment* segment_at(double lambda) const;
  Vector coefficients_at(double lambda) const;
  int num_events() const;

 private:
  int p_;
  double lambda_max_;
  double lambda_min_;
  std::vector<PathSegment> segments_;
};

struct PathOptions {
  bool force = false;
  // 0 picks 50 * (n + p).
  int max_events = 0;
};

// Homotopy (LARS with Lasso drops) from lambda_max down to lambda_min.
LassoPath lasso_path(const RegressionProblem& problem, double lambda_min,
                     const PathOptions& options = {});

}  // namespace lassorec
