#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hawkvol/grid.hpp"
#include "hawkvol/kernels.hpp"
#include "hawkvol/riccati.hpp"

namespace hawkvol {

/// Exogenous input: constant rate, a sampled rate, or the total-impact form
/// mu(t) = A * (column j of the kernel).
struct ExogenousInput {
  enum class Type { constant, sampled, total_impact };
  Type type = Type::constant;
  Vec mu;           // constant
  Grid<Vec> rate;   // sampled
  Matrix A;         // total_impact
  std::size_t column = 0;

  static ExogenousInput constant(Vec mu);
  static ExogenousInput sampled(Grid<Vec> rate);
  static ExogenousInput total_impact(Matrix A, std::size_t column);

  std::string validate(std::size_t d) const;
  Vec value(const Kernel& phi, double t) const;
  Vec sup_on(const Kernel& phi, double t0, double t1) const;
  /// entrywise integral over [0, t]
  Vec integral0(const Kernel& phi, double t) const;
};

struct HawkesPath {
  double horizon = 0.0;
  std::vector<std::vector<double>> events;  // per component, increasing times
  std::uint64_t seed = 0;

  std::size_t total_events() const;
};

struct ThinningOptions {
  std::size_t event_cap = 1000000;
  double dom_refresh = 0.1;
  /// gammaish entries with alpha < 1 are unbounded at lag zero; their bound
  /// contribution uses the value at a shifted lag times a safety factor, and
  /// the audit reports any intensity excursions above the bound.
  double singular_shift = 5e-3;
  double singular_safety = 1.05;
};

struct ThinningAudit {
  std::size_t proposals = 0;
  std::size_t accepted = 0;
  std::size_t bound_violations = 0;
};

/// Exact thinning sampler: piecewise-constant dominating rate from the
/// left-endpoint excitation plus the exogenous sup over the window, refreshed
/// at every event and every dom_refresh interval. Kernel entries must be
/// nonincreasing past their mode (all built-in families are). Throws
/// NumericalError when the event cap is hit.
HawkesPath simulate(const Kernel& phi, const ExogenousInput& mu, double T, std::uint64_t seed,
                    const ThinningOptions& opts = {}, ThinningAudit* audit = nullptr);

/// Intensity at time t given event history (events strictly before t excite).
Vec intensity_at(const Kernel& phi, const ExogenousInput& mu,
                 const std::vector<std::vector<double>>& events, double t);

/// Intensity sampled on a uniform grid; exponential terms run on a state
/// recursion, other families are summed per event.
Grid<Vec> intensity_on_grid(const Kernel& phi, const ExogenousInput& mu,
                            const HawkesPath& path, double delta, double T);

/// Entrywise integral of the intensity over [0, t], exact per kernel term.
Vec integrated_intensity(const Kernel& phi, const ExogenousInput& mu,
                         const HawkesPath& path, double t);

/// H = mu + R * mu on the grid, from resolvent_grid plus discrete convolution.
Grid<Vec> baseline_H(const Kernel& phi, const ExogenousInput& mu, double delta,
                     double horizon);

/// f * Lambda(T) + h * dN~(T) along one path: grid quadrature of the
/// intensity for the absolutely continuous parts, exact sums over events.
Cx functional_sample(const Kernel& phi, const ExogenousInput& mu, const HawkesPath& path,
                     const TestFunctions& tf, double T);

struct McEstimate {
  Cx mean;
  double std_err = 0.0;
  std::size_t paths = 0;
};

/// Monte Carlo mean of exp{functional_sample} over independent paths with
/// counter-based per-path seeds; identical results for any worker count.
McEstimate mc_fourier_laplace(const Kernel& phi, const ExogenousInput& mu,
                              const TestFunctions& tf, double T, std::size_t n_paths,
                              std::uint64_t seed, unsigned threads = 1);

/// Rescaled-process accessors over a base path simulated on horizon n * T.
struct RescaledPath {
  ScalingScheme scheme;
  HawkesPath base;

  /// N^(n)(t) = N(nt) / (n theta_n)
  Vec count(double t) const;
  /// N~^(n)(t) = (N(nt) - I_Lambda(nt)) / sqrt(n theta_n)
  Vec compensated(const Kernel& phi, const ExogenousInput& mu, double t) const;
  /// I_{Lambda^(n)}(t) = I_Lambda(nt) / (n theta_n)
  Vec integrated_intensity(const Kernel& phi, const ExogenousInput& mu, double t) const;
};

RescaledPath rescale(HawkesPath base, ScalingScheme scheme);

}  // namespace hawkvol
