#include <memory>

#include <benchmark/benchmark.h>

#include "lassorec/denoised.hpp"
#include "lassorec/lasso.hpp"
#include "lassorec/random.hpp"

namespace {

using namespace lassorec;

RegressionProblem make_problem(int n, int p) {
  Rng rng(derive_seed(99, n, p));
  auto design = std::make_shared<const DesignMatrix>(
      DesignMatrix(rng.normal_matrix(n, p)).normalize_columns());
  Vector beta = Vector::Zero(p);
  for (int k : rng.subset(p, 5)) beta(k) = 1.0;
  return RegressionProblem::simulate(design, TruthSpec(beta, 1.0), rng.normal_vector(n, 1.0));
}

void BM_CoordinateDescent(benchmark::State& state) {
  auto prob = make_problem(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
  double lambda = 0.1 * lambda_max(prob);
  for (auto _ : state) benchmark::DoNotOptimize(solve_at(prob, lambda).coefficients.data());
}
BENCHMARK(BM_CoordinateDescent)->Args({100, 200})->Args({200, 400})->Args({400, 800});

void BM_Homotopy(benchmark::State& state) {
  auto prob = make_problem(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
  double lambda = 0.1 * lambda_max(prob);
  for (auto _ : state) {
    LassoPath path = lasso_path(prob, lambda);
    benchmark::DoNotOptimize(path.num_events());
  }
}
BENCHMARK(BM_Homotopy)->Args({100, 200})->Args({200, 400})->Args({400, 800});

// Ten warm-started solves versus one path covering the same range.
void BM_GridOfTen(benchmark::State& state) {
  auto prob = make_problem(200, 400);
  double lmax = lambda_max(prob);
  std::vector<double> grid;
  for (int i = 0; i < 10; ++i) grid.push_back(lmax * (1.0 - 0.09 * i));
  for (auto _ : state) benchmark::DoNotOptimize(solve_grid(prob, grid).size());
}
BENCHMARK(BM_GridOfTen);

void BM_XiPath(benchmark::State& state) {
  auto prob = make_problem(100, 200);
  double lambda = theory_lambda(1.0, 1.0, 100, 200, 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(xi_path(prob, lambda).intervals().size());
}
BENCHMARK(BM_XiPath);

}  // namespace

BENCHMARK_MAIN();
