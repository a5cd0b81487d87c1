#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "hawkvol/grid.hpp"
#include "hawkvol/matrix.hpp"

namespace hawkvol {

/// One additive piece of an exciting-kernel entry.
///
/// Families:
///   exponential(a, b):      a * exp(-b t)
///   powerlaw(a, kappa, bt): a * kappa * (1 + t)^(-kappa-1) * exp(-bt * t)
///   gammaish(a, alpha, b):  a * b^alpha t^(alpha-1) exp(-b t) / Gamma(alpha)
///   histogram:              piecewise-constant density on (edges[i-1], edges[i]]
///   zero
///
/// histogram is the representation produced by the prelimit-kernel builder;
/// the parametric families are the user-facing ones.
struct KernelTerm {
  enum class Family { zero, exponential, powerlaw, gammaish, histogram };

  Family family = Family::zero;
  double a = 0.0;      // weight (all families)
  double b = 0.0;      // rate (exponential, gammaish) / tilt (powerlaw)
  double alpha = 0.0;  // gammaish shape
  double kappa = 0.0;  // powerlaw tail index
  std::vector<double> edges;   // histogram breakpoints, increasing, edges[0] >= 0
  std::vector<double> levels;  // histogram density values, size edges.size()-1

  static KernelTerm exponential(double a, double b);
  static KernelTerm powerlaw(double a, double kappa, double tilt);
  static KernelTerm gammaish(double a, double alpha, double beta);
  static KernelTerm histogram(std::vector<double> edges, std::vector<double> levels);

  double value(double t) const;
  double l1() const;                      // integral over [0, infinity)
  double laplace(double lambda) const;    // integral of e^(-lambda t) * term
  double mass(double t0, double t1) const;  // integral over (t0, t1]
  /// sup of the term over the lag window [l0, l1]
  double sup_on(double l0, double l1) const;
  bool singular_at_zero() const;
  /// non-vacuous only for gammaish with alpha > 1
  double mode() const;

  std::string validate() const;  // empty when parameters are admissible
};

/// Entry = sum of terms (a single term for the parametric families).
struct KernelEntry {
  std::vector<KernelTerm> terms;

  bool zero() const;
  double value(double t) const;
  double l1() const;
  double laplace(double lambda) const;
  double mass(double t0, double t1) const;
  double integral0(double t) const { return t > 0.0 ? mass(0.0, t) : 0.0; }
  double sup_on(double l0, double l1) const;
  bool singular_at_zero() const;
  std::string validate() const;
};

/// d x d matrix of exciting-kernel entries.
struct Kernel {
  std::size_t d = 0;
  std::vector<KernelEntry> entries;  // row-major, d*d

  Kernel() = default;
  explicit Kernel(std::size_t dim) : d(dim), entries(dim * dim) {}
  static Kernel scalar(KernelTerm term);

  KernelEntry& at(std::size_t i, std::size_t j) { return entries[i * d + j]; }
  const KernelEntry& at(std::size_t i, std::size_t j) const { return entries[i * d + j]; }

  std::string validate() const;
  bool singular_at_zero() const;
};

/// Space-time rescaling index: block length n and mass scale theta_n.
struct ScalingScheme {
  std::size_t n = 1;
  double theta_n = 1.0;

  double gamma() const;  // sqrt(n * theta_n)
};

/// Entrywise L1 norms (the mean offspring matrix).
Matrix l1_norm(const Kernel& phi);

/// Entrywise Laplace transforms at lambda >= 0; equals l1_norm at lambda = 0.
Matrix laplace_kernel(const Kernel& phi, double lambda);

/// Solution of R = phi + phi * R on the grid by forward left-rectangle
/// stepping: R(t_k) = phi(t_k) + delta * sum_{j<k} phi(t_k - t_j) R(t_j).
/// Entries that are singular at the origin are represented by their cell
/// averages instead of point values.
Grid<Matrix> resolvent_grid(const Kernel& phi, double delta, double horizon);

/// Diagnostic: || L_R(lambda) (Id - L_phi(lambda)) - L_phi(lambda) ||_max with
/// L_R computed by left-rectangle grid quadrature of R.
double laplace_identity_check(const Kernel& phi, const Grid<Matrix>& R, double lambda);

/// sqrt(n theta_n) * (Id - L_phi(lambda / n))
Matrix psi_n(const Kernel& phi_n, const ScalingScheme& scheme, double lambda);

/// sqrt(n theta_n) * (K - L_phi(lambda / n)); the quantity whose limit in n
/// identifies the asymptotic regime.
Matrix varphi_n(const Kernel& phi_n, const Matrix& K, const ScalingScheme& scheme,
                double lambda);

struct RescaledResolvent {
  Grid<Matrix> values;      // R^(n)(t_k) = sqrt(n/theta_n) R_n(n t_k)
  Grid<Matrix> integrated;  // I_{R^(n)}(t_k)
};

/// Rescaled resolvent assembled from a fine-grid solve of R_n over [0, n*T].
/// fine_delta is the step used for R_n in original time; throws NumericalError
/// when n * horizon / fine_delta exceeds the memory cap.
RescaledResolvent rescaled_resolvent(const Kernel& phi_n, const ScalingScheme& scheme,
                                     double delta, double horizon, double fine_delta);

/// Cell-mass representation of the measure R^(n)(t) dt on the rescaled grid.
/// Exact (closed form) for a scalar single-exponential kernel; other kernels
/// use Gaver-Stehfest inversion of the Laplace transform
/// L_phi(./n) Psi^(n)(.)^{-1}. Used by the rescaled Riccati solver, whose cost
/// must not grow with n.
GridMeasure rescaled_resolvent_measure(const Kernel& phi_n, const ScalingScheme& scheme,
                                       double delta, double horizon);

}  // namespace hawkvol
