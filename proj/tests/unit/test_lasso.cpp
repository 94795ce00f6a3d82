#include <gtest/gtest.h>

#include <memory>

#include "lassorec/errors.hpp"
#include "lassorec/lasso.hpp"
#include "lassorec/random.hpp"
#include "support/oracles.hpp"

namespace lassorec {
namespace {

RegressionProblem identity_problem() {
  auto D = std::make_shared<DesignMatrix>(Matrix::Identity(2, 2));
  Vector y(2);
  y << 3, 1;
  return RegressionProblem(D, y);
}

RegressionProblem gaussian_problem(std::uint64_t seed, int n, int p, int s,
                                   double sigma) {
  Rng rng(seed);
  auto D = std::make_shared<DesignMatrix>(rng.normal_matrix(n, p));
  Vector beta = Vector::Zero(p);
  for (int k : rng.subset(p, s)) beta(k) = rng.uniform() < 0.5 ? -1.5 : 2.0;
  Vector eps = rng.normal_vector(n, sigma);
  return RegressionProblem::simulate(D, TruthSpec(beta, sigma), eps);
}

TEST(SolveAt, IdentitySoftThreshold) {
  LassoFit fit = solve_at(identity_problem(), 2.0);
  EXPECT_NEAR(fit.coefficients(0), 2.0, 1e-12);
  EXPECT_EQ(fit.coefficients(1), 0.0);
}

TEST(SolveAt, LambdaZeroIsOls) {
  auto prob = gaussian_problem(21, 30, 5, 3, 0.5);
  LassoFit fit = solve_at(prob, 0.0, {.tol = 1e-12});
  Vector ols = prob.X().colPivHouseholderQr().solve(prob.response());
  EXPECT_LE((fit.coefficients - ols).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(SolveAt, AboveLambdaMaxIsZero) {
  auto prob = gaussian_problem(22, 20, 8, 2, 0.1);
  double lmax = lambda_max(prob);
  LassoFit fit = solve_at(prob, lmax * 1.0001);
  EXPECT_EQ(fit.coefficients.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(fit.kkt.max_violation, 0.0);
  EXPECT_EQ(solve_at(prob, lmax).coefficients.cwiseAbs().maxCoeff(), 0.0);
}

// Orthogonal design with arbitrary column scales: the Gram matrix is
// diagonal, so each coordinate is a scalar soft threshold.
TEST(SolveAt, DiagonalGramMatchesClosedForm) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(1000 + seed);
    const int n = 12, p = 6;
    Matrix Q = rng.normal_matrix(n, p).householderQr().householderQ() *
               Matrix::Identity(n, p);
    Vector scale(p);
    for (int k = 0; k < p; ++k) scale(k) = 0.5 + 2.0 * rng.uniform();
    Matrix X = Q * scale.asDiagonal();
    Vector y = rng.normal_vector(n, 2.0);
    RegressionProblem prob(std::make_shared<DesignMatrix>(X), y);
    double lambda = 3.0 * rng.uniform();
    LassoFit fit = solve_at(prob, lambda, {.tol = 1e-12});
    for (int k = 0; k < p; ++k) {
      double z = X.col(k).dot(y), nk = X.col(k).squaredNorm();
      EXPECT_NEAR(fit.coefficients(k), oracle::soft(z, lambda / 2) / nk, 1e-10);
    }
  }
}

TEST(LambdaMax, Values) {
  auto D = std::make_shared<DesignMatrix>(Matrix::Identity(2, 2));
  EXPECT_EQ(lambda_max(RegressionProblem(D, Vector::Zero(2))), 0.0);
  EXPECT_DOUBLE_EQ(lambda_max(identity_problem()), 6.0);
  auto prob = gaussian_problem(23, 15, 9, 2, 1.0);
  double ref = 0.0;
  for (int k = 0; k < 9; ++k) {
    double acc = 0.0;
    for (int i = 0; i < 15; ++i) acc += prob.X()(i, k) * prob.response()(i);
    ref = std::max(ref, 2.0 * std::abs(acc));
  }
  EXPECT_NEAR(lambda_max(prob), ref, 1e-12 * ref);
}

TEST(KktCheck, ZeroAboveLambdaMax) {
  auto prob = gaussian_problem(24, 10, 4, 1, 1.0);
  KktReport r = kkt_check(prob, lambda_max(prob) + 1.0, Vector::Zero(4));
  EXPECT_EQ(r.max_violation, 0.0);
}

TEST(KktCheck, PerturbationGrowsViolation) {
  auto prob = gaussian_problem(25, 40, 10, 3, 0.5);
  double lambda = 0.3 * lambda_max(prob);
  LassoFit fit = solve_at(prob, lambda, {.tol = 1e-12});
  int k = support(fit.coefficients).front();
  double prev = kkt_check(prob, fit).max_violation;
  for (double d : {1e-6, 1e-5, 1e-4, 1e-3, 1e-2}) {
    Vector b = fit.coefficients;
    b(k) += d;
    double v = kkt_check(prob, lambda, b).max_violation;
    EXPECT_GT(v, prev);
    prev = v;
  }
}

TEST(KktCheck, TightSolveHasSmallGap) {
  auto prob = gaussian_problem(26, 40, 60, 4, 0.5);
  double lambda = 0.2 * lambda_max(prob);
  LassoFit fit = solve_at(prob, lambda, {.tol = 1e-10});
  KktReport r = kkt_check(prob, fit);
  EXPECT_LE(r.duality_gap, 1e-9 * (1.0 + r.objective));
  for (int k : support(fit.coefficients)) {
    EXPECT_TRUE(std::binary_search(r.active_set.begin(), r.active_set.end(), k));
    double s = fit.coefficients(k) > 0 ? 1.0 : -1.0;
    EXPECT_LE(std::abs(r.gradient(k) - s * lambda), r.max_violation + 1e-15);
  }
}

TEST(SolveAt, RefusesFlaggedDesignWithoutForce) {
  Matrix X(3, 2);
  X << 1, 2, 2, 4, 3, 6;
  auto D = std::make_shared<DesignMatrix>(X);
  RegressionProblem prob(D, Vector::Ones(3));
  EXPECT_THROW(solve_at(prob, 0.1), DegeneratePathError);
  EXPECT_NO_THROW(solve_at(prob, 0.1, {.force = true}));
}

TEST(SolveAt, ConvergenceErrorCarriesGap) {
  auto prob = gaussian_problem(27, 30, 40, 5, 0.5);
  try {
    solve_at(prob, 1e-3, {.tol = 1e-14, .max_sweeps = 2});
    FAIL();
  } catch (const ConvergenceError& e) {
    EXPECT_GT(e.last_gap(), 0.0);
    EXPECT_EQ(e.sweeps(), 2);
  }
}

TEST(SolveGrid, WarmStartsAgreeWithColdSolves) {
  auto prob = gaussian_problem(28, 30, 20, 3, 0.3);
  double lmax = lambda_max(prob);
  std::vector<double> grid{0.9 * lmax, 0.5 * lmax, 0.1 * lmax, 0.01 * lmax};
  auto fits = solve_grid(prob, grid, {.tol = 1e-12});
  for (std::size_t i = 0; i < grid.size(); ++i) {
    LassoFit cold = solve_at(prob, grid[i], {.tol = 1e-12});
    EXPECT_LE((fits[i].coefficients - cold.coefficients).cwiseAbs().maxCoeff(),
              1e-8);
  }
  std::vector<double> bad{1.0, 2.0};
  EXPECT_THROW(solve_grid(prob, bad), InputError);
}

TEST(TheoryLambda, Formula) {
  EXPECT_DOUBLE_EQ(theory_lambda(1.0, 1.0, 100, 200),
                   2.0 * std::sqrt(100.0 * std::log(200.0)));
  EXPECT_DOUBLE_EQ(theory_lambda(0.5, 2.0, 50, 10, 3.0),
                   3.0 * 0.5 * 2.0 * std::sqrt(50.0 * std::log(10.0)));
}

}  // namespace
}  // namespace lassorec
