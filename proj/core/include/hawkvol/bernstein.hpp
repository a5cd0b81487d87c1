#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "hawkvol/grid.hpp"
#include "hawkvol/kernels.hpp"
#include "hawkvol/matlin.hpp"
#include "hawkvol/matrix.hpp"

namespace hawkvol {

/// Matrix-valued measure on (0, infinity): point masses plus density cells.
/// Cells live on whatever (typically log-spaced) partition the builder chose.
struct LevyMeasure {
  struct Cell {
    double lo = 0.0, hi = 0.0;
    Matrix mass;
  };
  std::vector<std::pair<double, Matrix>> atoms;
  std::vector<Cell> cells;

  std::string validate(std::size_t d) const;
  /// integral of (1 ^ t) against the measure, entrywise
  Matrix one_wedge_t(std::size_t d) const;
  Matrix total(std::size_t d) const;
  bool empty() const { return atoms.empty() && cells.empty(); }
};

/// Matrix-valued extended Bernstein function. Entries are nondecreasing on
/// [0, inf); the constant part (drift) may have either sign.
///
/// Two backends:
///  - levy triplet (b, sigma, nu): b + sigma lambda + int (1 - e^{-lambda t}) nu(dt)
///  - shifted_power (analytic):    drift + c ((lambda + beta)^alpha - beta^alpha),
///    c diagonal; alpha = 1 recovers the affine family drift + c lambda.
class EbfMatrix {
 public:
  enum class Kind { triplet, shifted_power };

  static EbfMatrix from_triplet(Matrix b, Matrix sigma, LevyMeasure nu);
  static EbfMatrix shifted_power(Matrix drift, Matrix c_diag, double alpha, double beta);
  static EbfMatrix scalar_triplet(double b, double sigma, LevyMeasure nu = {});
  static EbfMatrix scalar_power(double drift, double c, double alpha, double beta = 0.0);

  Kind kind() const { return kind_; }
  std::size_t dim() const { return d_; }
  Matrix eval(double lambda) const;
  Matrix drift() const;  // value at 0 == triplet constant
  const Matrix& sigma() const { return sigma_; }
  const LevyMeasure& nu() const { return nu_; }
  const Matrix& c_diag() const { return c_; }
  double alpha() const { return alpha_; }
  double beta() const { return beta_; }

  std::string validate() const;

 private:
  Kind kind_ = Kind::triplet;
  std::size_t d_ = 0;
  Matrix b_, sigma_, c_;
  double alpha_ = 1.0, beta_ = 0.0;
  LevyMeasure nu_;
};

/// The reduced ell x ell function (Q^T F Q)_II + U_IJ (Id - U_JJ)^{-1} (Q^T F Q)_JI.
Matrix reduced_varphi(const AdmissibleStructure& s, const EbfMatrix& F, double lambda);

struct AdmissibilityReport {
  bool admissible = false;
  double min_abs_det = 0.0;
  std::vector<double> near_singular_lambdas;
};

/// Scans |det(reduced_varphi)| over [lambda_plus, lambda_max].
AdmissibilityReport is_admissible(const AdmissibleStructure& s, const EbfMatrix& F,
                                  double lambda_max, std::size_t n_scan = 200,
                                  double det_floor = 1e-10);

/// Laplace transform of the potential measure:
/// Q [[vphi^{-1}, vphi^{-1} U_IJ (Id-U_JJ)^{-1}], [0, 0]] Q^T.
Matrix potential_laplace(const AdmissibleStructure& s, const EbfMatrix& F, double lambda);

/// Potential measure of the driftless part c (lambda + beta)^alpha of an
/// analytic family: density t^(alpha-1) e^(-beta t) / Gamma(alpha) * c^{-1},
/// cells integrated exactly. No atom at zero.
GridMeasure potential_measure_closed_form(const EbfMatrix& F, double delta, double horizon);

struct PotentialInversion {
  GridMeasure measure;
  double monotonicity_repair = 0.0;  // total mass clipped to restore monotonicity
};

/// Numerical route: atom from the lambda -> infinity limit of the transform
/// (must be diagonal), distribution function by Gaver-Stehfest, cells by
/// differencing. Throws NumericalError on oscillatory inversions.
/// Order 14 keeps the inversion error of smooth monotone targets below 1e-6
/// in double precision (order 12 floors near 1e-5).
PotentialInversion potential_inversion_gs(const AdmissibleStructure& s, const EbfMatrix& F,
                                          double delta, double horizon, int gs_order = 14);

/// Solves Pi0 = Pi + Pi0 * (bPhi . Pi) forward in time for Pi, handling the
/// atom of Pi0 implicitly.
GridMeasure potential_from_resolvent_eq(const GridMeasure& Pi0, const Matrix& bPhi);

/// Discrete residuals of both orderings of the resolvent equation.
std::pair<double, double> resolvent_eq_residual(const GridMeasure& Pi0, const GridMeasure& Pi,
                                                const Matrix& bPhi);

enum class Criticality { subcritical, critical, supercritical };

struct CriticalityReport {
  Criticality label = Criticality::critical;
  bool heuristic = false;  // multivariate growth-trend branch
  double growth_ratio = 0.0;
};

/// Univariate rule: sign of the drift.
CriticalityReport classify_criticality(double drift_scalar);
/// Multivariate heuristic from the growth trend of the distribution function,
/// optionally sharpened by a user estimate of the exponential growth rate.
CriticalityReport classify_criticality(const GridMeasure& Pi, double lambda_pi_estimate = 0.0);

const char* to_string(Criticality c);

/// Builds a kernel sequence phi_n with gamma_n (A - L_phi_n(lambda/n)) ->
/// f(lambda), f a triplet-backed matrix function, A >= 0, gamma_n = n.
/// Returns the kernel and the implied scaling (n, theta_n = n).
std::pair<Kernel, ScalingScheme> build_prelimit_kernels(const EbfMatrix& f, const Matrix& A,
                                                        std::size_t n);

/// Upsilon(t_k) = (Gamma convolved with the measure)(t_k) on the measure grid,
/// for a baseline of the form Upsilon = Pi * Gamma.
Grid<Vec> upsilon_from_gamma(const GridMeasure& Pi, const Grid<Vec>& Gamma);

}  // namespace hawkvol
