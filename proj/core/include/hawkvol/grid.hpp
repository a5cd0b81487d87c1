#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include "hawkvol/matrix.hpp"

namespace hawkvol {

using Cx = std::complex<double>;
using Vec = std::vector<double>;
using CxVec = std::vector<Cx>;

/// Uniform-grid samples: values[k] lives at t_k = k * delta, k = 0..steps().
template <class T>
struct Grid {
  double delta = 0.0;
  std::vector<T> values;

  Grid() = default;
  Grid(double d, std::size_t n_steps, const T& fill) : delta(d), values(n_steps + 1, fill) {}

  std::size_t steps() const { return values.empty() ? 0 : values.size() - 1; }
  double horizon() const { return delta * static_cast<double>(steps()); }
  T& operator[](std::size_t k) { return values[k]; }
  const T& operator[](std::size_t k) const { return values[k]; }
};

/// Number of steps for a horizon, rounded to the nearest multiple of delta.
std::size_t grid_steps(double delta, double horizon);

/// Nonnegative matrix-valued measure on [0, horizon] discretized as an atom
/// at zero plus per-cell masses, cells[k] = mu((t_k, t_{k+1}]).
struct GridMeasure {
  double delta = 0.0;
  Matrix atom0;
  std::vector<Matrix> cells;

  std::size_t dim() const { return atom0.rows(); }
  std::size_t n_cells() const { return cells.size(); }
  double horizon() const { return delta * static_cast<double>(cells.size()); }

  /// Distribution function at t_k: atom0 + sum of the first k cells.
  Matrix cumulative(std::size_t k) const;
  /// Whole distribution function as a grid (values at t_0..t_K).
  Grid<Matrix> cumulative_grid() const;
  Matrix total() const { return cumulative(cells.size()); }

  bool entrywise_nonnegative(double tol = 0.0) const;
};

// small helpers shared by the solvers

/// row-vector (complex) times real matrix
CxVec row_times(const CxVec& v, const Matrix& m);
/// complex dot of a row vector with a real column vector
Cx dot(const CxVec& v, const Vec& x);

}  // namespace hawkvol
