#pragma once

// Hard-thresholded Lasso and sign-consistency checks. Logs are natural.

#include "lassorec/lasso.hpp"
#include "lassorec/model.hpp"

namespace lassorec {

class ThresholdRule {
 public:
  ThresholdRule(double sigma, double t, int n, int p);

  double sigma() const { return sigma_; }
  double t() const { return t_; }
  int n() const { return n_; }
  int p() const { return p_; }
  // sigma * t * sqrt(log p / n).
  double cutoff() const { return cutoff_; }

 private:
  double sigma_, t_;
  int n_, p_;
  double cutoff_;
};

// Keeps component k iff |fit_k| >= cutoff.
Vector hard_threshold(const Vector& fit, const ThresholdRule& rule);

bool sign_consistent(const Vector& estimate, const Vector& truth);

struct TwoStepResult {
  double lambda = 0.0;
  double cutoff = 0.0;
  Vector lasso;
  Vector thresholded;
  IndexSet support_before;
  IndexSet support_after;
  bool lasso_sign_consistent = false;
  bool recovered = false;
};

// solve_at followed by hard_threshold; sign checks need the stored truth.
TwoStepResult two_step_recover(const RegressionProblem& problem, double lambda,
                               const ThresholdRule& rule,
                               const SolveOptions& options = {});

// True iff sign(path(lambda)) equals sign(truth) for some lambda on the path,
// checked exactly: per segment the sign pattern is constant inside and can
// only change at its ends. Returns the witness lambda when found.
std::optional<double> path_sign_consistent(const LassoPath& path,
                                           const Vector& truth);

}  // namespace lassorec
