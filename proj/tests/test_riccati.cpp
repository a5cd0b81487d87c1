#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "hawkvol/errors.hpp"
#include "hawkvol/kernels.hpp"
#include "hawkvol/riccati.hpp"

using namespace hawkvol;

namespace {

GridMeasure lebesgue(double delta, double horizon, double atom = 0.0, double density = 1.0) {
  GridMeasure m;
  m.delta = delta;
  m.atom0 = Matrix(1, 1);
  m.atom0(0, 0) = atom;
  const std::size_t K = grid_steps(delta, horizon);
  Matrix cell(1, 1);
  cell(0, 0) = density * delta;
  m.cells.assign(K, cell);
  return m;
}

TestFunctions const_tf(double delta, std::size_t steps, Cx f0, Cx h0) {
  return TestFunctions::constant(delta, steps, CxVec{f0}, CxVec{h0});
}

}  // namespace

TEST_CASE("w_exp: pinned values") {
  CHECK(std::abs(w_exp(Cx(0.0, 0.0))) == 0.0);
  CHECK(w_exp(Cx(-1.0, 0.0)).real() == doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
  CHECK(w_exp(Cx(-1.0, 0.0)).imag() == doctest::Approx(0.0));
  const Cx at_ipi = w_exp(Cx(0.0, M_PI));
  CHECK(at_ipi.real() == doctest::Approx(-2.0).epsilon(1e-14));
  CHECK(at_ipi.imag() == doctest::Approx(-M_PI).epsilon(1e-14));
  // series branch consistency with the direct formula
  const Cx small(3e-3, -4e-3);
  const Cx direct = std::exp(small) - 1.0 - small;
  CHECK(std::abs(w_exp(small) - direct) < 1e-16);
}

TEST_CASE("w_exp_scaled tends to the quadratic x^2/2") {
  const Cx x(1.0, 1.0);
  const double nt = 1e6;  // n = theta_n = 1e3
  const Cx got = w_exp_scaled(x, std::sqrt(nt));
  const Cx quad = 0.5 * x * x;
  CHECK(std::abs(got - quad) <= 2.0 * std::abs(x) * std::abs(quad) / std::sqrt(nt));
}

TEST_CASE("solve_limit: tanh oracle on the Lebesgue kernel") {
  // V' = -0.5 + V^2/2, V(0) = 0  =>  V(t) = -tanh(t/2)
  const double delta = 1e-3;
  const GridMeasure Pi = lebesgue(delta, 1.0);
  const auto sol = solve_limit(Pi, const_tf(delta, Pi.n_cells(), Cx(-0.5, 0.0), Cx(0.0, 0.0)));
  const double v1 = sol.V[1000][0].real();
  CHECK(std::abs(v1 + std::tanh(0.5)) <= 1e-3);
  CHECK(std::abs(sol.V[1000][0].imag()) < 1e-14);
  // Re V <= 0 along the path
  CHECK(sol.max_re_v <= 1e-8);
}

TEST_CASE("solve_limit: grid refinement is first order on the tanh case") {
  auto err_at = [&](double delta) {
    const GridMeasure Pi = lebesgue(delta, 1.0);
    const auto sol = solve_limit(Pi, const_tf(delta, Pi.n_cells(), Cx(-0.5, 0.0), Cx(0.0, 0.0)));
    return std::abs(sol.V[Pi.n_cells()][0].real() + std::tanh(0.5));
  };
  const double r = err_at(2e-3) / err_at(1e-3);
  CHECK(r > 1.5);
  CHECK(r < 2.5);
}

TEST_CASE("solve_limit: pure atom gives the exact quadratic root") {
  GridMeasure Pi;
  Pi.delta = 0.01;
  Pi.atom0 = Matrix(1, 1);
  Pi.atom0(0, 0) = 1.0;
  Pi.cells.assign(100, Matrix(1, 1));
  const auto sol = solve_limit(Pi, const_tf(0.01, 100, Cx(-0.5, 0.0), Cx(0.0, 0.0)));
  for (std::size_t k = 0; k <= 100; ++k)
    CHECK(std::abs(sol.V[k][0] - Cx(1.0 - std::sqrt(2.0), 0.0)) <= 1e-12);
}

TEST_CASE("solve_limit: zero data gives the zero solution") {
  const GridMeasure Pi = lebesgue(0.01, 1.0, 0.3);
  const auto sol = solve_limit(Pi, const_tf(0.01, 100, Cx(0.0, 0.0), Cx(0.0, 0.0)));
  for (std::size_t k = 0; k <= 100; ++k) CHECK(std::abs(sol.V[k][0]) == 0.0);
}

TEST_CASE("solve_limit: small-atom solutions converge to the atomless one") {
  const double delta = 1e-3;
  const std::size_t K = 1000;
  const auto tf = const_tf(delta, K, Cx(-0.5, 0.0), Cx(0.0, 0.3));
  const auto base = solve_limit(lebesgue(delta, 1.0), tf);
  double prev_gap = 1e9;
  for (double a : {0.1, 0.01, 0.001}) {
    const auto sol = solve_limit(lebesgue(delta, 1.0, a), tf);
    double gap = 0.0;
    for (std::size_t k = 0; k <= K; ++k)
      gap = std::max(gap, std::abs(sol.V[k][0] - base.V[k][0]));
    CHECK(gap < prev_gap);
    CHECK(gap < 10.0 * a);
    prev_gap = gap;
  }
}

TEST_CASE("solve_limit: rejects non-diagonal atom") {
  GridMeasure Pi = lebesgue(0.01, 1.0);
  Pi.atom0 = Matrix(1, 1);  // fine
  GridMeasure Pi2;
  Pi2.delta = 0.01;
  Pi2.atom0 = Matrix{{0.1, 0.05}, {0.0, 0.1}};
  Pi2.cells.assign(100, Matrix(2, 2));
  TestFunctions tf = TestFunctions::constant(0.01, 100, CxVec{Cx(-1, 0), Cx(-1, 0)},
                                             CxVec{Cx(0, 0), Cx(0, 0)});
  CHECK_THROWS_AS(solve_limit(Pi2, tf), std::invalid_argument);
}

TEST_CASE("solve_prelimit: zero data, positivity guard, pinned bounds") {
  const Kernel phi = Kernel::scalar(KernelTerm::exponential(0.5, 1.0));
  const double delta = 1e-3;
  const Grid<Matrix> R = resolvent_grid(phi, delta, 3.0);
  const std::size_t K = R.steps();

  SUBCASE("f = h = 0 gives V = 0") {
    const auto sol = solve_prelimit(R, const_tf(delta, K, Cx(0, 0), Cx(0, 0)));
    for (std::size_t k = 0; k <= K; ++k) CHECK(std::abs(sol.V[k][0]) == 0.0);
  }

  SUBCASE("sandwich bounds of the pinned example hold gridwise") {
    const auto tf = const_tf(delta, K, Cx(-1.0, 0.0), Cx(0.0, 0.5));
    const auto sol = solve_prelimit(R, tf);
    CHECK(sol.max_re_v <= 1e-8);
    // discrete convolutions with the same rule as the solver
    for (std::size_t k = 0; k <= K; k += 50) {
      double f_phi = 0.0, one_phi = 0.0;
      for (std::size_t j = 1; j <= k; ++j) {
        const double pv = phi.at(0, 0).value(delta * static_cast<double>(j));
        f_phi += -1.0 * pv * delta;
        one_phi += pv * delta;
      }
      const double re_v = sol.V[k][0].real();
      CHECK(re_v <= f_phi + 1e-8);
      CHECK(re_v >= f_phi - 2.0 * one_phi - 1e-8);
      const double im_v = sol.V[k][0].imag();
      // |Im V| <= |Im((f - h) * phi)| + 1 * phi
      CHECK(std::abs(im_v) <= 0.5 * one_phi + one_phi + 1e-8);
    }
  }
}

TEST_CASE("solve_prelimit: sandwich bounds on randomized valid inputs") {
  std::mt19937_64 rng(321);
  std::uniform_real_distribution<double> u(0.1, 1.0);
  for (int trial = 0; trial < 5; ++trial) {
    const double a = 0.3 + 0.4 * u(rng), b = 0.8 + u(rng);
    const Kernel phi = Kernel::scalar(KernelTerm::exponential(a, b));
    const double delta = 2e-3;
    const Grid<Matrix> R = resolvent_grid(phi, delta, 2.0);
    const std::size_t K = R.steps();
    const double fr = -u(rng), hi = u(rng);
    const auto sol = solve_prelimit(R, const_tf(delta, K, Cx(fr, 0.0), Cx(0.0, hi)));
    CHECK(sol.max_re_v <= 1e-8);
    for (std::size_t k = 0; k <= K; k += 25) {
      double one_phi = 0.0;
      for (std::size_t j = 1; j <= k; ++j)
        one_phi += phi.at(0, 0).value(delta * static_cast<double>(j)) * delta;
      const double f_phi = fr * one_phi;
      CHECK(sol.V[k][0].real() <= f_phi + 1e-8);
      CHECK(sol.V[k][0].real() >= f_phi - 2.0 * one_phi - 1e-8);
      CHECK(std::abs(sol.V[k][0].imag()) <= (std::abs(fr) + std::abs(hi)) * one_phi + one_phi + 1e-8);
    }
  }
}

TEST_CASE("solve_rescaled: zero data and uniform boundedness across n") {
  const double b = 0.5, c = 1.0, delta = 2e-3, T = 2.0;
  double sup_norm_max = 0.0;
  for (std::size_t n : {100u, 1000u, 10000u}) {
    ScalingScheme s{n, static_cast<double>(n)};
    const Kernel phi = Kernel::scalar(KernelTerm::exponential((1.0 - b / s.gamma()) / c, 1.0 / c));
    const GridMeasure cells = rescaled_resolvent_measure(phi, s, delta, T);
    const std::size_t K = cells.n_cells();

    const auto zero = solve_rescaled(cells, const_tf(delta, K, Cx(0, 0), Cx(0, 0)),
                                     static_cast<double>(n) * s.theta_n);
    for (std::size_t k = 0; k <= K; k += 100) CHECK(std::abs(zero.V[k][0]) == 0.0);

    const auto sol = solve_rescaled(cells, const_tf(delta, K, Cx(-0.7, 0.0), Cx(0.0, 0.4)),
                                    static_cast<double>(n) * s.theta_n);
    CHECK(sol.max_re_v <= 1e-8);
    double sup = 0.0;
    for (std::size_t k = 0; k <= K; ++k) sup = std::max(sup, std::abs(sol.V[k][0]));
    sup_norm_max = std::max(sup_norm_max, sup);
  }
  CHECK(sup_norm_max < 5.0);  // bounded uniformly in n
}

TEST_CASE("rescaled solutions approach the limit solution") {
  const double b = 0.5, c = 1.0, delta = 1e-3, T = 2.0;
  const std::size_t K = grid_steps(delta, T);
  const auto tf = const_tf(delta, K, Cx(-0.5, 0.0), Cx(0.0, 0.25));

  // limit: Pi has density e^{-b t / c} / c
  GridMeasure Pi;
  Pi.delta = delta;
  Pi.atom0 = Matrix(1, 1);
  Pi.cells.assign(K, Matrix(1, 1));
  for (std::size_t k = 0; k < K; ++k) {
    const double t0 = delta * static_cast<double>(k), t1 = t0 + delta;
    Pi.cells[k](0, 0) = (std::exp(-b * t0 / c) - std::exp(-b * t1 / c)) / b;
  }
  const auto lim = solve_limit(Pi, tf);

  double prev = 1e9;
  for (std::size_t n : {100u, 1000u, 10000u}) {
    ScalingScheme s{n, static_cast<double>(n)};
    const Kernel phi = Kernel::scalar(KernelTerm::exponential((1.0 - b / s.gamma()) / c, 1.0 / c));
    const GridMeasure cells = rescaled_resolvent_measure(phi, s, delta, T);
    const auto sol = solve_rescaled(cells, tf, static_cast<double>(n) * s.theta_n);
    double gap = 0.0;
    for (std::size_t k = 0; k <= K; ++k)
      gap = std::max(gap, std::abs(sol.V[k][0] - lim.V[k][0]));
    CHECK(gap < prev);
    prev = gap;
  }
  CHECK(prev < 1e-3);
}

TEST_CASE("fourier_laplace_limit: tanh closed form and unit modulus bound") {
  const double delta = 1e-3, T = 2.0;
  const GridMeasure Pi = lebesgue(delta, T);
  const std::size_t K = Pi.n_cells();
  const auto tf = const_tf(delta, K, Cx(-0.5, 0.0), Cx(0.0, 0.0));
  const auto sol = solve_limit(Pi, tf);

  Grid<Vec> upsilon(delta, K, Vec{0.0});
  for (std::size_t k = 0; k <= K; ++k) upsilon[k][0] = delta * static_cast<double>(k);

  const Cx fl = fourier_laplace_limit(sol, upsilon, T);
  // log value: -0.5 T + (T - 2 tanh(T/2)) / 2 = -tanh(1) at T = 2
  CHECK(std::log(std::abs(fl)) == doctest::Approx(-std::tanh(1.0)).epsilon(2e-3));
  CHECK(std::abs(fl) <= 1.0 + 1e-12);

  // f = h = 0 gives exactly 1
  const auto zero = solve_limit(Pi, const_tf(delta, K, Cx(0, 0), Cx(0, 0)));
  CHECK(std::abs(fourier_laplace_limit(zero, upsilon, T) - Cx(1.0, 0.0)) == 0.0);

  // modulus stays <= 1 with an oscillatory argument too
  const auto osc = solve_limit(Pi, const_tf(delta, K, Cx(-0.3, 0.0), Cx(0.0, 0.8)));
  CHECK(std::abs(fourier_laplace_limit(osc, upsilon, T)) <= 1.0 + 1e-12);
}

TEST_CASE("fourier_laplace_limit: rejects decreasing baselines") {
  const double delta = 0.01;
  const GridMeasure Pi = lebesgue(delta, 1.0);
  const auto sol = solve_limit(Pi, const_tf(delta, 100, Cx(-0.5, 0), Cx(0, 0)));
  Grid<Vec> bad(delta, 100, Vec{0.0});
  for (std::size_t k = 0; k <= 100; ++k) bad[k][0] = -0.01 * static_cast<double>(k);
  CHECK_THROWS_AS(fourier_laplace_limit(sol, bad, 1.0), std::invalid_argument);
}

TEST_CASE("fourier_laplace_hawkes: trivial cases and unit modulus") {
  const Kernel phi = Kernel::scalar(KernelTerm::exponential(0.5, 1.0));
  const double delta = 1e-3, T = 2.0;
  const Grid<Matrix> R = resolvent_grid(phi, delta, T);
  const std::size_t K = R.steps();
  Grid<Vec> H(delta, K, Vec{0.0});
  for (std::size_t k = 0; k <= K; ++k)
    H[k][0] = 2.0 - std::exp(-0.5 * delta * static_cast<double>(k));

  const auto zero = solve_prelimit(R, const_tf(delta, K, Cx(0, 0), Cx(0, 0)));
  CHECK(std::abs(fourier_laplace_hawkes(zero, H, T) - Cx(1.0, 0.0)) == 0.0);

  const auto sol = solve_prelimit(R, const_tf(delta, K, Cx(-0.3, 0.0), Cx(0.0, 0.5)));
  CHECK(std::abs(fourier_laplace_hawkes(sol, H, T)) <= 1.0 + 1e-12);
}

TEST_CASE("test function validation") {
  TestFunctions bad = TestFunctions::constant(0.01, 10, CxVec{Cx(0.1, 0.0)}, CxVec{Cx(0, 0)});
  CHECK(!bad.validate().empty());
  TestFunctions bad2 = TestFunctions::constant(0.01, 10, CxVec{Cx(-1, 0)}, CxVec{Cx(0.2, 0.4)});
  CHECK(!bad2.validate().empty());
  TestFunctions ok = TestFunctions::constant(0.01, 10, CxVec{Cx(-1, 2)}, CxVec{Cx(0, -3)});
  CHECK(ok.validate().empty());
}
