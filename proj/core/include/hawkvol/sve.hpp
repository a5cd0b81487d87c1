#pragma once

#include <cstdint>
#include <functional>
#include <string>

#include "hawkvol/grid.hpp"
#include "hawkvol/riccati.hpp"

namespace hawkvol {

/// Baseline of the limit equations: nondecreasing Upsilon, optionally its
/// derivative (required by the density form) and the input Gamma when the
/// baseline has the form Upsilon = Pi * Gamma.
struct LimitBaseline {
  Grid<Vec> upsilon;
  Grid<Vec> upsilon_prime;  // empty when unavailable
  Grid<Vec> gamma_prime;    // empty when unavailable

  std::string validate() const;
  bool has_prime() const { return !upsilon_prime.values.empty(); }
};

struct SvePath {
  double delta = 0.0;
  Grid<Vec> Xi;  // nondecreasing, Xi(0) = Upsilon(0)
  Grid<Vec> M;   // martingale part, M(0) = 0
  Grid<Vec> xi;  // derivative trajectory where the scheme produces one
  std::uint64_t seed = 0;
  double clip_fraction = 0.0;  // share of steps with a truncated square root
};

/// Explicit Euler for xi = Upsilon' + pi * (sqrt(xi) dB) with the kernel given
/// by its cell masses (no atom); full truncation at negative excursions.
SvePath simulate_density_form(const GridMeasure& pi_cells, const LimitBaseline& base, double T,
                              std::uint64_t seed);

/// Power-kernel specialization xi = pi0 c^{-1} * (a - b xi) + pi0 c^{-1} * sqrt(xi) dB
/// with pi0(t) = t^(alpha-1) e^(-beta t) / Gamma(alpha), alpha in (1/2, 1).
SvePath simulate_rough_cir(double alpha, double beta, const Vec& a, const Matrix& b,
                           const Matrix& c_diag, double T, double delta, std::uint64_t seed);

/// Scalar scheme for a kernel with an atom at zero: each step solves the
/// fixed point dXi = dUpsilon + atom * dM + history, dM = sqrt(dXi) Z.
/// Reduces pathwise to the density form when the atom vanishes.
SvePath simulate_atom_form(const GridMeasure& Pi, const LimitBaseline& base, double T,
                           std::uint64_t seed);

/// Drift-separated form xi = pi0 * (Gamma' - bPhi xi) + pi0 * sqrt(xi) dB.
SvePath simulate_pi0_form(const GridMeasure& Pi0_cells, const Matrix& bPhi,
                          const LimitBaseline& base, double T, std::uint64_t seed);

/// Deterministic companion of the pi0 form: m = pi0 * (Gamma' - bPhi m),
/// the mean function of the simulated paths.
Grid<Vec> deterministic_mean_pi0(const GridMeasure& Pi0_cells, const Matrix& bPhi,
                                 const Grid<Vec>& gamma_prime, double T);

/// f * dXi(T) + h * dM(T) along one path (Stieltjes sums over increments,
/// including the jump of Xi at zero).
Cx sve_functional(const SvePath& path, const TestFunctions& tf, double T);

struct CharacteristicCheck {
  Cx mc_mean;
  double std_err = 0.0;
  Cx analytic;
  double gap = 0.0;
  double z = 0.0;
};

/// Monte Carlo mean of exp{f * dXi + h * dM} over generated paths against the
/// transform-side value exp{W * dUpsilon}.
CharacteristicCheck limit_characteristic_check(
    const std::function<SvePath(std::size_t)>& make_path, std::size_t n_paths,
    const TestFunctions& tf, const RiccatiSolution& limit_solution, const Grid<Vec>& Upsilon,
    double T);

}  // namespace hawkvol
