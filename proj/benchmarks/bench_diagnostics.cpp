#include <benchmark/benchmark.h>

#include "lassorec/diagnostics.hpp"
#include "lassorec/random.hpp"

namespace {

using namespace lassorec;

GramMatrix make_gram(int n, int p) {
  Rng rng(derive_seed(7, n, p));
  return build_gram(DesignMatrix(rng.normal_matrix(n, p)));
}

void BM_SparseEigExact(benchmark::State& state) {
  GramMatrix C = make_gram(40, static_cast<int>(state.range(0)));
  const int m = static_cast<int>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(sparse_eig(C, m).phi_min);
  state.counters["subsets"] = static_cast<double>(subset_count(C.p(), m));
}
BENCHMARK(BM_SparseEigExact)->Args({20, 3})->Args({30, 3})->Args({20, 5});

void BM_SparseEigHeuristic(benchmark::State& state) {
  GramMatrix C = make_gram(200, static_cast<int>(state.range(0)));
  SparseEigOptions o;
  o.mode = EigMode::kHeuristic;
  for (auto _ : state) benchmark::DoNotOptimize(sparse_eig(C, 10, o).phi_min);
}
BENCHMARK(BM_SparseEigHeuristic)->Arg(100)->Arg(400);

void BM_Irrepresentable(benchmark::State& state) {
  GramMatrix C = make_gram(200, 400);
  const int s = static_cast<int>(state.range(0));
  IndexSet K;
  for (int k = 0; k < s; ++k) K.push_back(3 * k);
  std::vector<int> signs(s, 1);
  for (auto _ : state) benchmark::DoNotOptimize(irrepresentable_check(C, K, signs).value);
}
BENCHMARK(BM_Irrepresentable)->Arg(5)->Arg(20);

void BM_BuildGram(benchmark::State& state) {
  Rng rng(3);
  DesignMatrix d(rng.normal_matrix(200, static_cast<int>(state.range(0))));
  for (auto _ : state) benchmark::DoNotOptimize(build_gram(d).entries().data());
}
BENCHMARK(BM_BuildGram)->Arg(200)->Arg(800);

}  // namespace

BENCHMARK_MAIN();
