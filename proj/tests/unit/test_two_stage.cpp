#include <gtest/gtest.h>

#include <cmath>
#include <memory>

#include "lassorec/errors.hpp"
#include "lassorec/random.hpp"
#include "lassorec/two_stage.hpp"

namespace lassorec {
namespace {

TEST(ThresholdRule, Cutoff) {
  ThresholdRule r(0.5, 3.0, 100, 200);
  EXPECT_DOUBLE_EQ(r.cutoff(), 0.5 * 3.0 * std::sqrt(std::log(200.0) / 100.0));
  EXPECT_THROW(ThresholdRule(-1.0, 1.0, 10, 10), InputError);
}

TEST(HardThreshold, KeepsAtCutoff) {
  ThresholdRule r(1.0, 1.0, 1, 3);  // cutoff sqrt(log 3)
  double c = r.cutoff();
  Vector v(4);
  v << c, -c, std::nextafter(c, 0.0), -2 * c;
  Vector out = hard_threshold(v, r);
  EXPECT_EQ(out(0), c);
  EXPECT_EQ(out(1), -c);
  EXPECT_EQ(out(2), 0.0);
  EXPECT_EQ(out(3), -2 * c);
}

TEST(HardThreshold, DocumentedExample) {
  ThresholdRule r(1.0, 1.0, 100, 10);
  EXPECT_NEAR(r.cutoff(), 0.15174, 1e-5);
  Vector fit(3);
  fit << 2.0, 0.001, -0.5;
  Vector out = hard_threshold(fit, r);
  EXPECT_EQ(out(0), 2.0);
  EXPECT_EQ(out(1), 0.0);
  EXPECT_EQ(out(2), -0.5);
  EXPECT_EQ(hard_threshold(out, r), out);
  ThresholdRule high(1.0, 5.0, 100, 10);
  EXPECT_EQ(support(hard_threshold(fit, high)), (IndexSet{0}));
}

TEST(SignConsistent, Basic) {
  Vector a(3), b(3);
  a << 0.1, 0, -3;
  b << 2, 0, -1;
  EXPECT_TRUE(sign_consistent(a, b));
  a(1) = 1e-300;
  EXPECT_FALSE(sign_consistent(a, b));
}

TEST(TwoStep, OrthogonalDesignRecovers) {
  const int n = 64, p = 16;
  Rng rng(100);
  Matrix Q = rng.normal_matrix(n, p).householderQr().householderQ() *
             Matrix::Identity(n, p);
  auto D = std::make_shared<DesignMatrix>(std::sqrt(double(n)) * Q);
  Vector beta = Vector::Zero(p);
  beta(3) = 2.0;
  beta(9) = -1.5;
  const double sigma = 0.1;
  auto prob = RegressionProblem::simulate(D, TruthSpec(beta, sigma),
                                          rng.normal_vector(n, sigma));
  double lambda = theory_lambda(sigma, 1.0, n, p);
  TwoStepResult r = two_step_recover(prob, lambda, ThresholdRule(sigma, 4.0, n, p));
  EXPECT_TRUE(r.recovered);
  EXPECT_EQ(r.support_after, (IndexSet{3, 9}));
  // C = I: the Lasso is a soft threshold of X^T Y / n at lambda / (2n).
  Vector z = D->entries().transpose() * prob.response() / n;
  for (int k = 0; k < p; ++k) {
    double a = std::max(std::abs(z(k)) - lambda / (2.0 * n), 0.0);
    EXPECT_NEAR(r.lasso(k), std::copysign(a, z(k)), 1e-9);
  }
}

TEST(TwoStep, ThresholdRemovesSmallFalsePositive) {
  Vector fit(4);
  fit << 1.0, 0.01, -0.8, 0.0;
  ThresholdRule r(1.0, 1.0, 10000, 4);
  Vector out = hard_threshold(fit, r);
  Vector truth(4);
  truth << 1, 0, -1, 0;
  EXPECT_FALSE(sign_consistent(fit, truth));
  EXPECT_TRUE(sign_consistent(out, truth));
}

TEST(PathSignConsistent, IdentityDesign) {
  auto D = std::make_shared<DesignMatrix>(Matrix::Identity(3, 3));
  Vector y(3);
  y << 3, -1, 0.2;
  LassoPath path = lasso_path(RegressionProblem(D, y), 0.0);
  Vector truth(3);
  truth << 1, -1, 0;
  auto w = path_sign_consistent(path, truth);
  ASSERT_TRUE(w.has_value());
  // Pattern (+, -, 0) holds exactly on (0.4, 2).
  EXPECT_GT(*w, 0.4);
  EXPECT_LT(*w, 2.0);
  truth << -1, 0, 0;
  EXPECT_FALSE(path_sign_consistent(path, truth).has_value());
}

// Irrepresentable value 1.3 / 1.2 on a noiseless square design: column 3
// is active for every lambda > 0. Only lambda = 0 recovers, so the path
// stops just short of it.
TEST(PathSignConsistent, NeverConsistentWhenIrrepresentableFails) {
  Matrix C(3, 3);
  const double c = 0.65;
  C << 1, 0.2, c, 0.2, 1, c, c, c, 1;
  Eigen::LLT<Matrix> llt(C);
  const int n = 3;
  Matrix X = std::sqrt(double(n)) * Matrix(llt.matrixU());
  Vector beta(3);
  beta << 1, 1, 0;
  auto D = std::make_shared<DesignMatrix>(X);
  auto prob = RegressionProblem::simulate(D, TruthSpec(beta, 0.0), Vector::Zero(n));
  LassoPath path = lasso_path(prob, 1e-6 * lambda_max(prob));
  Vector truth = beta;
  EXPECT_FALSE(path_sign_consistent(path, truth).has_value());
}

}  // namespace
}  // namespace lassorec
