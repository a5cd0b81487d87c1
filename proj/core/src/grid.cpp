#include "hawkvol/grid.hpp"

#include <cmath>
#include <stdexcept>

namespace hawkvol {

std::size_t grid_steps(double delta, double horizon) {
  if (!(delta > 0.0)) throw std::invalid_argument("grid: delta must be > 0");
  if (!(horizon >= delta)) throw std::invalid_argument("grid: horizon must be >= delta");
  return static_cast<std::size_t>(std::llround(horizon / delta));
}

Matrix GridMeasure::cumulative(std::size_t k) const {
  Matrix c = atom0;
  for (std::size_t i = 0; i < k && i < cells.size(); ++i) c += cells[i];
  return c;
}

Grid<Matrix> GridMeasure::cumulative_grid() const {
  Grid<Matrix> g(delta, cells.size(), atom0);
  Matrix acc = atom0;
  g[0] = acc;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    acc += cells[i];
    g[i + 1] = acc;
  }
  return g;
}

bool GridMeasure::entrywise_nonnegative(double tol) const {
  if (!atom0.nonnegative(tol)) return false;
  for (const Matrix& c : cells)
    if (!c.nonnegative(tol)) return false;
  return true;
}

CxVec row_times(const CxVec& v, const Matrix& m) {
  if (v.size() != m.rows()) throw std::invalid_argument("row_times: shape mismatch");
  CxVec out(m.cols(), Cx(0.0, 0.0));
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const Cx vi = v[i];
    if (vi == Cx(0.0, 0.0)) continue;
    for (std::size_t j = 0; j < m.cols(); ++j) out[j] += vi * m(i, j);
  }
  return out;
}

Cx dot(const CxVec& v, const Vec& x) {
  if (v.size() != x.size()) throw std::invalid_argument("dot: shape mismatch");
  Cx s(0.0, 0.0);
  for (std::size_t i = 0; i < v.size(); ++i) s += v[i] * x[i];
  return s;
}

}  // namespace hawkvol
