#include <benchmark/benchmark.h>

#include "permext/exponent.hpp"
#include "permext/fredholm.hpp"
#include "permext/operator_cache.hpp"

using namespace permext;

namespace {

const SpectralOperator& unit_operator() {
  static const SpectralOperator S = build_spectral_operator(1.0);
  return S;
}

}  // namespace

// Argument is -log10(eps).
static void BM_BoundD0(benchmark::State& state) {
  const double eps = std::pow(10.0, -static_cast<double>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(bound_D0(unit_operator(), 2.0, eps));
}
BENCHMARK(BM_BoundD0)->DenseRange(1, 5)->Unit(benchmark::kMicrosecond);

static void BM_BoundSymmetric(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(bound_D_symmetric(unit_operator(), 2.0, 1e-3));
}
BENCHMARK(BM_BoundSymmetric)->Unit(benchmark::kMillisecond);

static void BM_GammaSweep(benchmark::State& state) {
  const std::vector<double> grid = log_grid(1e-4, 1e-1, 4);
  for (auto _ : state) benchmark::DoNotOptimize(gamma_from_sweep(unit_operator(), 2.0, grid));
}
BENCHMARK(BM_GammaSweep)->Unit(benchmark::kMillisecond);
