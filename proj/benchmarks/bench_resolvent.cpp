#include <benchmark/benchmark.h>

#include "hawkvol/kernels.hpp"

using namespace hawkvol;

static void BM_ResolventGridScalar(benchmark::State& state) {
  const Kernel phi = Kernel::scalar(KernelTerm::exponential(0.5, 1.0));
  const auto steps = static_cast<double>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(resolvent_grid(phi, 1.0 / steps, 1.0));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_ResolventGridScalar)->Arg(500)->Arg(1000)->Arg(2000)->Arg(4000)->Complexity();

static void BM_ResolventGridMatrix(benchmark::State& state) {
  Kernel phi(2);
  phi.at(0, 0).terms.push_back(KernelTerm::exponential(0.4, 1.0));
  phi.at(0, 1).terms.push_back(KernelTerm::exponential(0.3, 2.0));
  phi.at(1, 0).terms.push_back(KernelTerm::exponential(0.2, 1.0));
  phi.at(1, 1).terms.push_back(KernelTerm::exponential(0.5, 1.5));
  const auto steps = static_cast<double>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(resolvent_grid(phi, 1.0 / steps, 1.0));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_ResolventGridMatrix)->Arg(250)->Arg(500)->Arg(1000)->Complexity();

static void BM_RescaledResolventMeasure(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  const ScalingScheme scheme{n, static_cast<double>(n)};
  const Kernel phi =
      Kernel::scalar(KernelTerm::exponential(1.0 - 0.5 / scheme.gamma(), 1.0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(rescaled_resolvent_measure(phi, scheme, 1e-3, 2.0));
  }
}
BENCHMARK(BM_RescaledResolventMeasure)->Arg(100)->Arg(10000);

BENCHMARK_MAIN();
