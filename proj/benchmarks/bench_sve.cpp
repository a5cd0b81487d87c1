#include <benchmark/benchmark.h>

#include "hawkvol/hawkes.hpp"
#include "hawkvol/sve.hpp"

using namespace hawkvol;

static void BM_SimulateDensityForm(benchmark::State& state) {
  const double delta = 1.0 / static_cast<double>(state.range(0));
  GridMeasure pi;
  pi.delta = delta;
  pi.atom0 = Matrix(1, 1);
  pi.cells.assign(grid_steps(delta, 1.0), Matrix(1, 1));
  for (std::size_t k = 0; k < pi.cells.size(); ++k)
    pi.cells[k](0, 0) = std::exp(-delta * k) - std::exp(-delta * (k + 1));
  LimitBaseline base;
  base.upsilon = Grid<Vec>(delta, pi.n_cells(), Vec{0.0});
  base.upsilon_prime = Grid<Vec>(delta, pi.n_cells(), Vec{1.0});
  for (std::size_t k = 0; k <= pi.n_cells(); ++k) base.upsilon[k][0] = delta * k;
  std::uint64_t seed = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(simulate_density_form(pi, base, 1.0, ++seed));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_SimulateDensityForm)->Arg(250)->Arg(500)->Arg(1000)->Complexity();

static void BM_SimulateRoughCir(benchmark::State& state) {
  const double delta = 1.0 / static_cast<double>(state.range(0));
  std::uint64_t seed = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(simulate_rough_cir(0.75, 0.0, {1.0}, Matrix{{0.5}}, Matrix{{1.0}},
                                                1.0, delta, ++seed));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_SimulateRoughCir)->Arg(250)->Arg(500)->Arg(1000)->Complexity();

static void BM_HawkesThinning(benchmark::State& state) {
  const Kernel phi = Kernel::scalar(KernelTerm::exponential(0.5, 1.0));
  const ExogenousInput mu = ExogenousInput::constant({1.0});
  const double T = static_cast<double>(state.range(0));
  std::uint64_t seed = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(simulate(phi, mu, T, ++seed));
  }
}
BENCHMARK(BM_HawkesThinning)->Arg(10)->Arg(100);

BENCHMARK_MAIN();
