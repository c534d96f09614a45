#include <benchmark/benchmark.h>

#include "permext/lsqfit.hpp"

using namespace permext;

namespace {

StieltjesRational planted() { return StieltjesRational(0.5, 0.5, {0.4, 3.0}, {0.3, 1.2}); }

}  // namespace

// Argument is the number of band samples.
static void BM_FitNoisy(benchmark::State& state) {
  const ExperimentalData d = synthesize_band_data(planted(), static_cast<int>(state.range(0)), 1e-3, 7);
  for (auto _ : state) benchmark::DoNotOptimize(fit_stieltjes(d, 0.5));
}
BENCHMARK(BM_FitNoisy)->Arg(50)->Arg(200)->Arg(800)->Unit(benchmark::kMillisecond);

static void BM_Certify(benchmark::State& state) {
  const ExperimentalData d = synthesize_band_data(planted(), 200, 0.0, 1);
  for (auto _ : state) benchmark::DoNotOptimize(certify(planted(), d));
}
BENCHMARK(BM_Certify)->Unit(benchmark::kMillisecond);
