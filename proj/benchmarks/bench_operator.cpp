#include <benchmark/benchmark.h>

#include "permext/conformal.hpp"
#include "permext/quadop.hpp"

using namespace permext;

static void BM_BuildOperator(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(build_operator(1.0, n));
  state.SetComplexityN(n);
}
BENCHMARK(BM_BuildOperator)->RangeMultiplier(2)->Range(50, 400)->Complexity(benchmark::oNSquared);

static void BM_Eigen(benchmark::State& state) {
  const DiscretizedOperator op = build_operator(1.0, static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(eigen(op));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Eigen)->RangeMultiplier(2)->Range(50, 400)->Complexity(benchmark::oNCubed)->Unit(benchmark::kMillisecond);

static void BM_RiemannInvariant(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(riemann_invariant(1.0, static_cast<int>(state.range(0))));
}
BENCHMARK(BM_RiemannInvariant)->Arg(64)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);
