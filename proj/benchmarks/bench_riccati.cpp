#include <benchmark/benchmark.h>

#include "hawkvol/kernels.hpp"
#include "hawkvol/riccati.hpp"

using namespace hawkvol;

namespace {

GridMeasure lebesgue(double delta, double horizon) {
  GridMeasure m;
  m.delta = delta;
  m.atom0 = Matrix(1, 1);
  Matrix cell(1, 1);
  cell(0, 0) = delta;
  m.cells.assign(grid_steps(delta, horizon), cell);
  return m;
}

}  // namespace

static void BM_SolveLimit(benchmark::State& state) {
  const double delta = 1.0 / static_cast<double>(state.range(0));
  const GridMeasure Pi = lebesgue(delta, 1.0);
  const auto tf = TestFunctions::constant(delta, Pi.n_cells(), CxVec{Cx(-0.5, 0.0)},
                                          CxVec{Cx(0.0, 0.25)});
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_limit(Pi, tf));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_SolveLimit)->Arg(500)->Arg(1000)->Arg(2000)->Arg(4000)->Complexity();

static void BM_SolvePrelimit(benchmark::State& state) {
  const double delta = 1.0 / static_cast<double>(state.range(0));
  const Kernel phi = Kernel::scalar(KernelTerm::exponential(0.5, 1.0));
  const Grid<Matrix> R = resolvent_grid(phi, delta, 1.0);
  const auto tf = TestFunctions::constant(delta, R.steps(), CxVec{Cx(-0.5, 0.0)},
                                          CxVec{Cx(0.0, 0.25)});
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_prelimit(R, tf));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_SolvePrelimit)->Arg(500)->Arg(1000)->Arg(2000)->Complexity();

static void BM_SolveRescaled(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  const ScalingScheme scheme{n, static_cast<double>(n)};
  const Kernel phi =
      Kernel::scalar(KernelTerm::exponential(1.0 - 0.5 / scheme.gamma(), 1.0));
  const double delta = 1e-3;
  const GridMeasure cells = rescaled_resolvent_measure(phi, scheme, delta, 2.0);
  const auto tf = TestFunctions::constant(delta, cells.n_cells(), CxVec{Cx(-0.5, 0.0)},
                                          CxVec{Cx(0.0, 0.25)});
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_rescaled(cells, tf, static_cast<double>(n) * scheme.theta_n));
  }
}
BENCHMARK(BM_SolveRescaled)->Arg(100)->Arg(10000);

BENCHMARK_MAIN();
