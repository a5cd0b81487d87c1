#pragma once

#include <string>

#include "hawkvol/grid.hpp"
#include "hawkvol/matrix.hpp"

namespace hawkvol {

/// Transform arguments sampled on the solver grid: f with Re <= 0 entrywise,
/// h purely imaginary entrywise.
struct TestFunctions {
  Grid<CxVec> f;
  Grid<CxVec> h;

  std::size_t dim() const { return f.values.empty() ? 0 : f.values.front().size(); }
  std::string validate() const;

  static TestFunctions constant(double delta, std::size_t steps, const CxVec& f0,
                                const CxVec& h0);
};

struct RiccatiSolution {
  enum class Kind { prelimit, rescaled, limit };
  Kind kind = Kind::prelimit;
  Grid<CxVec> V;
  Grid<CxVec> W;
  double n_theta = 0.0;  // rescaled solutions: n * theta_n
  double max_re_v = 0.0;
  /// limit solutions: steps where the discarded quadratic root also had
  /// Re <= 0 (root selection fell back to the small-atom continuity rule)
  std::size_t ambiguous_roots = 0;
};

/// componentwise e^x - 1 - x
CxVec w_exp(const CxVec& x);
Cx w_exp(Cx x);
/// gamma^2 * w_exp(x / gamma), evaluated through a series for small |x|/gamma;
/// tends to x^2/2 as gamma grows.
Cx w_exp_scaled(Cx x, double gamma);

/// Nonlinear Volterra solve V = W * R, W = f + w_exp(V + h), stepped forward
/// with W values at already-computed lags; R comes from resolvent_grid.
/// Throws NumericalError if Re V exceeds tol_pos anywhere.
RiccatiSolution solve_prelimit(const Grid<Matrix>& R, const TestFunctions& tf,
                               double tol_pos = 1e-8);

/// Rescaled variant V = W * R^(n) with W = f + n theta w_exp((V + h)/sqrt(n theta));
/// the rescaled resolvent enters as a cell-mass measure so the cost does not
/// grow with n.
RiccatiSolution solve_rescaled(const GridMeasure& resolvent_cells, const TestFunctions& tf,
                               double n_theta, double tol_pos = 1e-8);

/// Measure-kernel equation V = W * Pi, W = f + (V + h)^2 / 2. A diagonal atom
/// of Pi at zero makes each step an implicit scalar quadratic; the branch with
/// "-" principal square root is taken (continuous with the atomless limit).
RiccatiSolution solve_limit(const GridMeasure& Pi, const TestFunctions& tf,
                            double tol_pos = 1e-8);

/// exp{ W * H (T) } for a prelimit/rescaled solution and baseline H on the
/// same grid.
Cx fourier_laplace_hawkes(const RiccatiSolution& sol, const Grid<Vec>& H, double T);

/// exp{ W * dUpsilon (T) } for a limit solution; Upsilon must be entrywise
/// nondecreasing (its jump at zero is included in the Stieltjes sum).
Cx fourier_laplace_limit(const RiccatiSolution& sol, const Grid<Vec>& Upsilon, double T);

}  // namespace hawkvol
