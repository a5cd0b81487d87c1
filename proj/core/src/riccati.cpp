#include "hawkvol/riccati.hpp"

#include <cmath>
#include <stdexcept>

#include "hawkvol/errors.hpp"

namespace hawkvol {

namespace {

constexpr double kImagTol = 1e-12;

void check_grids_match(const Grid<CxVec>& a, const Grid<CxVec>& b) {
  if (a.delta != b.delta || a.values.size() != b.values.size())
    throw std::invalid_argument("test functions: f and h must share one grid");
}

// acc[j] += v[i] * m(i, j), no temporaries
void add_row_times(CxVec& acc, const CxVec& v, const Matrix& m) {
  const std::size_t d = v.size();
  for (std::size_t i = 0; i < d; ++i) {
    const Cx vi = v[i];
    if (vi == Cx(0.0, 0.0)) continue;
    for (std::size_t j = 0; j < d; ++j) acc[j] += vi * m(i, j);
  }
}

}  // namespace

std::string TestFunctions::validate() const {
  if (f.values.empty() || h.values.empty()) return "test functions: empty grids";
  if (f.delta != h.delta || f.values.size() != h.values.size())
    return "test functions: f and h must share one grid";
  const std::size_t d = dim();
  for (const CxVec& row : f.values) {
    if (row.size() != d) return "test functions: ragged f";
    for (const Cx& z : row)
      if (z.real() > 0.0) return "test functions: Re f must be <= 0 entrywise";
  }
  for (const CxVec& row : h.values) {
    if (row.size() != d) return "test functions: ragged h";
    for (const Cx& z : row)
      if (std::abs(z.real()) > kImagTol) return "test functions: h must be purely imaginary";
  }
  return {};
}

TestFunctions TestFunctions::constant(double delta, std::size_t steps, const CxVec& f0,
                                      const CxVec& h0) {
  TestFunctions tf;
  tf.f = Grid<CxVec>(delta, steps, f0);
  tf.h = Grid<CxVec>(delta, steps, h0);
  return tf;
}

Cx w_exp(Cx x) {
  if (std::abs(x) < 1e-2) {
    // x^2/2 (1 + x/3 + x^2/12 + x^3/60 + x^4/360): avoids the cancellation in
    // exp(x) - 1 - x
    const Cx x2 = x * x;
    return 0.5 * x2 *
           (1.0 + x / 3.0 + x2 / 12.0 + x2 * x / 60.0 + x2 * x2 / 360.0);
  }
  return std::exp(x) - 1.0 - x;
}

CxVec w_exp(const CxVec& x) {
  CxVec out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = w_exp(x[i]);
  return out;
}

Cx w_exp_scaled(Cx x, double gamma) {
  const Cx u = x / gamma;
  if (std::abs(u) < 1e-2) {
    const Cx x2 = x * x;
    const Cx u2 = u * u;
    return 0.5 * x2 * (1.0 + u / 3.0 + u2 / 12.0 + u2 * u / 60.0 + u2 * u2 / 360.0);
  }
  return gamma * gamma * (std::exp(u) - 1.0 - u);
}

namespace {

struct StepChecker {
  double tol_pos;
  double max_re = -1e300;

  void check(const CxVec& v, std::size_t k, const char* what) {
    for (const Cx& z : v) {
      max_re = std::max(max_re, z.real());
      if (z.real() > tol_pos)
        throw NumericalError(std::string(what) +
                             ": Re of the solution exceeded tol_pos at step " +
                             std::to_string(k) + " (grid too coarse or invalid inputs)");
    }
  }
};

}  // namespace

RiccatiSolution solve_prelimit(const Grid<Matrix>& R, const TestFunctions& tf, double tol_pos) {
  const std::string err = tf.validate();
  if (!err.empty()) throw std::invalid_argument("solve_prelimit: " + err);
  if (tf.f.delta != R.delta || tf.f.steps() < R.steps())
    throw std::invalid_argument("solve_prelimit: test functions do not cover the R grid");
  const std::size_t K = R.steps();
  const std::size_t d = tf.dim();
  const double delta = R.delta;

  RiccatiSolution sol;
  sol.kind = RiccatiSolution::Kind::prelimit;
  sol.V = Grid<CxVec>(delta, K, CxVec(d, Cx(0.0, 0.0)));
  sol.W = sol.V;
  StepChecker chk{tol_pos};

  auto w_at = [&](std::size_t k) {
    CxVec w = tf.f[k];
    for (std::size_t i = 0; i < d; ++i) w[i] += w_exp(sol.V[k][i] + tf.h[k][i]);
    return w;
  };

  sol.W[0] = w_at(0);  // V(0) = 0
  for (std::size_t k = 1; k <= K; ++k) {
    CxVec acc(d, Cx(0.0, 0.0));
    for (std::size_t j = 1; j <= k; ++j) add_row_times(acc, sol.W[k - j], R[j]);
    for (std::size_t i = 0; i < d; ++i) acc[i] *= delta;
    sol.V[k] = acc;
    chk.check(sol.V[k], k, "solve_prelimit");
    sol.W[k] = w_at(k);
  }
  sol.max_re_v = chk.max_re;
  return sol;
}

RiccatiSolution solve_rescaled(const GridMeasure& resolvent_cells, const TestFunctions& tf,
                               double n_theta, double tol_pos) {
  const std::string err = tf.validate();
  if (!err.empty()) throw std::invalid_argument("solve_rescaled: " + err);
  if (!(n_theta > 0.0)) throw std::invalid_argument("solve_rescaled: n_theta must be > 0");
  if (resolvent_cells.atom0.max_abs() != 0.0)
    throw std::invalid_argument("solve_rescaled: rescaled resolvent measure cannot carry an atom");
  if (tf.f.delta != resolvent_cells.delta || tf.f.steps() < resolvent_cells.n_cells())
    throw std::invalid_argument("solve_rescaled: test functions do not cover the grid");
  const std::size_t K = resolvent_cells.n_cells();
  const std::size_t d = tf.dim();
  const double gamma = std::sqrt(n_theta);

  RiccatiSolution sol;
  sol.kind = RiccatiSolution::Kind::rescaled;
  sol.n_theta = n_theta;
  sol.V = Grid<CxVec>(resolvent_cells.delta, K, CxVec(d, Cx(0.0, 0.0)));
  sol.W = sol.V;
  StepChecker chk{tol_pos};

  auto w_at = [&](std::size_t k) {
    CxVec w = tf.f[k];
    for (std::size_t i = 0; i < d; ++i) w[i] += w_exp_scaled(sol.V[k][i] + tf.h[k][i], gamma);
    return w;
  };

  sol.W[0] = w_at(0);
  for (std::size_t k = 1; k <= K; ++k) {
    CxVec acc(d, Cx(0.0, 0.0));
    for (std::size_t i = 1; i <= k; ++i) add_row_times(acc, sol.W[k - i], resolvent_cells.cells[i - 1]);
    sol.V[k] = acc;
    chk.check(sol.V[k], k, "solve_rescaled");
    sol.W[k] = w_at(k);
  }
  sol.max_re_v = chk.max_re;
  return sol;
}

RiccatiSolution solve_limit(const GridMeasure& Pi, const TestFunctions& tf, double tol_pos) {
  const std::string err = tf.validate();
  if (!err.empty()) throw std::invalid_argument("solve_limit: " + err);
  const std::size_t d = Pi.dim();
  if (tf.dim() != d) throw std::invalid_argument("solve_limit: dimension mismatch");
  if (tf.f.delta != Pi.delta || tf.f.steps() < Pi.n_cells())
    throw std::invalid_argument("solve_limit: test functions do not cover the grid");
  const double atom_scale = std::max(1.0, Pi.atom0.max_abs());
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j)
      if (i != j && std::abs(Pi.atom0(i, j)) > 1e-12 * atom_scale)
        throw std::invalid_argument("solve_limit: atom of Pi at zero must be diagonal");

  const std::size_t K = Pi.n_cells();
  RiccatiSolution sol;
  sol.kind = RiccatiSolution::Kind::limit;
  sol.V = Grid<CxVec>(Pi.delta, K, CxVec(d, Cx(0.0, 0.0)));
  sol.W = sol.V;
  StepChecker chk{tol_pos};

  auto solve_step = [&](std::size_t k, const CxVec& c) {
    CxVec v(d);
    for (std::size_t i = 0; i < d; ++i) {
      const double a = Pi.atom0(i, i);
      const Cx f = tf.f[k][i], h = tf.h[k][i];
      if (a <= 0.0) {
        v[i] = c[i];
        continue;
      }
      // (a/2) V^2 - (1 - a h) V + (a f + (a/2) h^2 + c) = 0
      const Cx B = 1.0 - a * h;
      const Cx C = a * f + 0.5 * a * h * h + c[i];
      const Cx sq = std::sqrt(B * B - 2.0 * a * C);
      const Cx lo = (B - sq) / a;
      const Cx hi = (B + sq) / a;
      if (hi.real() <= tol_pos) sol.ambiguous_roots += 1;
      v[i] = lo;
    }
    return v;
  };

  auto w_from = [&](std::size_t k, const CxVec& v) {
    CxVec w = tf.f[k];
    for (std::size_t i = 0; i < d; ++i) {
      const Cx s = v[i] + tf.h[k][i];
      w[i] += 0.5 * s * s;
    }
    return w;
  };

  sol.V[0] = solve_step(0, CxVec(d, Cx(0.0, 0.0)));
  chk.check(sol.V[0], 0, "solve_limit");
  sol.W[0] = w_from(0, sol.V[0]);
  for (std::size_t k = 1; k <= K; ++k) {
    CxVec c(d, Cx(0.0, 0.0));
    for (std::size_t i = 1; i <= k; ++i) add_row_times(c, sol.W[k - i], Pi.cells[i - 1]);
    sol.V[k] = solve_step(k, c);
    chk.check(sol.V[k], k, "solve_limit");
    sol.W[k] = w_from(k, sol.V[k]);
  }
  sol.max_re_v = chk.max_re;
  return sol;
}

namespace {

std::size_t index_for_time(const Grid<CxVec>& g, double T, const char* who) {
  const double raw = T / g.delta;
  const auto k = static_cast<std::size_t>(std::llround(raw));
  if (std::abs(raw - static_cast<double>(k)) > 1e-9 * std::max(1.0, raw) || k > g.steps())
    throw std::invalid_argument(std::string(who) + ": T is not a grid point");
  return k;
}

}  // namespace

Cx fourier_laplace_hawkes(const RiccatiSolution& sol, const Grid<Vec>& H, double T) {
  if (sol.kind == RiccatiSolution::Kind::limit)
    throw std::invalid_argument("fourier_laplace_hawkes: needs a prelimit/rescaled solution");
  if (H.delta != sol.W.delta)
    throw std::invalid_argument("fourier_laplace_hawkes: grid mismatch between W and H");
  const std::size_t kT = index_for_time(sol.W, T, "fourier_laplace_hawkes");
  if (kT > H.steps())
    throw std::invalid_argument("fourier_laplace_hawkes: H grid shorter than T");
  Cx acc(0.0, 0.0);
  for (std::size_t j = 1; j <= kT; ++j) acc += dot(sol.W[kT - j], H[j]);
  return std::exp(acc * sol.W.delta);
}

Cx fourier_laplace_limit(const RiccatiSolution& sol, const Grid<Vec>& Upsilon, double T) {
  if (sol.kind != RiccatiSolution::Kind::limit)
    throw std::invalid_argument("fourier_laplace_limit: needs a limit solution");
  if (Upsilon.delta != sol.W.delta)
    throw std::invalid_argument("fourier_laplace_limit: grid mismatch");
  const std::size_t kT = index_for_time(sol.W, T, "fourier_laplace_limit");
  if (kT > Upsilon.steps())
    throw std::invalid_argument("fourier_laplace_limit: Upsilon grid shorter than T");
  const std::size_t d = Upsilon[0].size();
  for (std::size_t k = 1; k <= Upsilon.steps(); ++k)
    for (std::size_t i = 0; i < d; ++i)
      if (Upsilon[k][i] < Upsilon[k - 1][i] - 1e-12)
        throw std::invalid_argument("fourier_laplace_limit: Upsilon must be nondecreasing");
  for (std::size_t i = 0; i < d; ++i)
    if (Upsilon[0][i] < 0.0)
      throw std::invalid_argument("fourier_laplace_limit: Upsilon(0) must be >= 0");

  Cx acc = dot(sol.W[kT], Upsilon[0]);  // jump of Upsilon at zero
  for (std::size_t j = 1; j <= kT; ++j) {
    Vec inc(d);
    for (std::size_t i = 0; i < d; ++i) inc[i] = Upsilon[j][i] - Upsilon[j - 1][i];
    acc += dot(sol.W[kT - j], inc);
  }
  return std::exp(acc);
}

}  // namespace hawkvol
