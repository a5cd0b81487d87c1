#include "hawkvol/sve.hpp"

#include <cmath>
#include <stdexcept>

#include "hawkvol/errors.hpp"
#include "hawkvol/quadrature.hpp"
#include "hawkvol/rng.hpp"

namespace hawkvol {

std::string LimitBaseline::validate() const {
  if (upsilon.values.empty()) return "baseline: Upsilon missing";
  const std::size_t d = upsilon.values.front().size();
  for (double v : upsilon.values.front())
    if (v < 0.0) return "baseline: Upsilon(0) must be >= 0";
  for (std::size_t k = 1; k <= upsilon.steps(); ++k)
    for (std::size_t i = 0; i < d; ++i)
      if (upsilon[k][i] < upsilon[k - 1][i] - 1e-12)
        return "baseline: Upsilon must be nondecreasing";
  if (!upsilon_prime.values.empty()) {
    if (upsilon_prime.delta != upsilon.delta ||
        upsilon_prime.values.size() != upsilon.values.size())
      return "baseline: Upsilon' grid mismatch";
    for (const Vec& row : upsilon_prime.values)
      for (double v : row)
        if (v < 0.0 || !std::isfinite(v)) return "baseline: Upsilon' must be >= 0";
  }
  return {};
}

namespace {

// flatten measure cells to lag-major storage: w[(i * d + c) * K + lag]
std::vector<double> flatten_cells(const GridMeasure& m) {
  const std::size_t d = m.dim(), K = m.n_cells();
  std::vector<double> w(d * d * K, 0.0);
  for (std::size_t lag = 0; lag < K; ++lag)
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t c = 0; c < d; ++c) w[(i * d + c) * K + lag] = m.cells[lag](i, c);
  return w;
}

struct PathAccumulator {
  double delta;
  std::size_t K, d;
  Grid<Vec> Xi, M, xi;
  std::size_t clipped = 0;

  PathAccumulator(double dl, std::size_t steps, std::size_t dim, const Vec& xi0)
      : delta(dl),
        K(steps),
        d(dim),
        Xi(dl, steps, Vec(dim, 0.0)),
        M(dl, steps, Vec(dim, 0.0)),
        xi(dl, steps, Vec(dim, 0.0)) {
    Xi[0] = xi0;  // overwritten by the caller with Upsilon(0)
  }
};

}  // namespace

SvePath simulate_density_form(const GridMeasure& pi_cells, const LimitBaseline& base, double T,
                              std::uint64_t seed) {
  const std::string err = base.validate();
  if (!err.empty()) throw std::invalid_argument("simulate_density_form: " + err);
  if (!base.has_prime())
    throw std::invalid_argument("simulate_density_form: Upsilon' required");
  if (pi_cells.atom0.max_abs() != 0.0)
    throw std::invalid_argument("simulate_density_form: kernel must be atomless");
  if (base.upsilon.delta != pi_cells.delta)
    throw std::invalid_argument("simulate_density_form: grid mismatch");

  const double delta = pi_cells.delta;
  const std::size_t K = grid_steps(delta, T);
  if (K > pi_cells.n_cells() || K > base.upsilon.steps())
    throw std::invalid_argument("simulate_density_form: inputs shorter than T");
  const std::size_t d = pi_cells.dim();
  const std::vector<double> w = flatten_cells(pi_cells);
  const double sq_delta = std::sqrt(delta);

  Rng rng(seed);
  Grid<Vec> xi(delta, K, Vec(d, 0.0));
  std::vector<double> noise(K * d, 0.0);  // sqrt(xi_j^+) dB_j, by (j, c)
  std::size_t clipped = 0;

  xi[0] = base.upsilon_prime[0];
  for (std::size_t c = 0; c < d; ++c) {
    double v = xi[0][c];
    if (v < 0.0) v = 0.0;
    noise[c] = std::sqrt(v) * sq_delta * rng.normal();
  }
  for (std::size_t k = 1; k <= K; ++k) {
    Vec val = base.upsilon_prime[k];
    for (std::size_t i = 0; i < d; ++i) {
      double acc = 0.0;
      for (std::size_t c = 0; c < d; ++c) {
        const double* wc = &w[(i * d + c) * pi_cells.n_cells()];
        const double* nc = &noise[c];
        for (std::size_t j = 0; j < k; ++j) acc += wc[k - 1 - j] * nc[j * d];
      }
      val[i] += acc / delta;
    }
    for (std::size_t c = 0; c < d; ++c)
      if (val[c] < 0.0) ++clipped;
    xi[k] = val;
    if (k < K)
      for (std::size_t c = 0; c < d; ++c) {
        const double v = std::max(val[c], 0.0);
        noise[k * d + c] = std::sqrt(v) * sq_delta * rng.normal();
      }
  }

  SvePath path;
  path.delta = delta;
  path.seed = seed;
  path.xi = xi;
  path.clip_fraction = static_cast<double>(clipped) / static_cast<double>(K * d);
  path.Xi = Grid<Vec>(delta, K, Vec(d, 0.0));
  path.M = Grid<Vec>(delta, K, Vec(d, 0.0));
  path.Xi[0] = base.upsilon[0];
  for (std::size_t k = 1; k <= K; ++k)
    for (std::size_t c = 0; c < d; ++c) {
      // left-rule integral of xi keeps the atom scheme pathwise compatible
      path.Xi[k][c] = path.Xi[k - 1][c] + delta * std::max(xi[k - 1][c], 0.0);
      path.M[k][c] = path.M[k - 1][c] + noise[(k - 1) * d + c];
    }
  return path;
}

SvePath simulate_rough_cir(double alpha, double beta, const Vec& a, const Matrix& b,
                           const Matrix& c_diag, double T, double delta, std::uint64_t seed) {
  if (!(alpha > 0.5) || !(alpha < 1.0))
    throw std::invalid_argument("simulate_rough_cir: alpha must lie in (1/2, 1)");
  if (beta < 0.0) throw std::invalid_argument("simulate_rough_cir: beta must be >= 0");
  const std::size_t d = a.size();
  if (b.rows() != d || b.cols() != d || c_diag.rows() != d)
    throw std::invalid_argument("simulate_rough_cir: shape mismatch");

  const std::size_t K = grid_steps(delta, T);
  std::vector<double> cell(K, 0.0);
  const double norm = std::exp(-std::lgamma(alpha));
  for (std::size_t k = 0; k < K; ++k)
    cell[k] = norm * power_exp_mass(alpha, beta, delta * static_cast<double>(k),
                                    delta * static_cast<double>(k + 1));

  Rng rng(seed);
  const double sq_delta = std::sqrt(delta);
  Grid<Vec> xi(delta, K, Vec(d, 0.0));
  std::vector<double> drive(K * d, 0.0);  // (a - b xi_j) delta + sqrt(xi_j^+) dB_j
  std::vector<double> noise(K * d, 0.0);
  std::size_t clipped = 0;

  auto fill_drive = [&](std::size_t j) {
    const Vec bx = b * xi[j];
    for (std::size_t c = 0; c < d; ++c) {
      const double v = std::max(xi[j][c], 0.0);
      noise[j * d + c] = std::sqrt(v) * sq_delta * rng.normal();
      drive[j * d + c] = (a[c] - bx[c]) * delta + noise[j * d + c];
    }
  };

  fill_drive(0);  // xi(0) = 0
  for (std::size_t k = 1; k <= K; ++k) {
    Vec val(d, 0.0);
    for (std::size_t i = 0; i < d; ++i) {
      double acc = 0.0;
      const double* dc = &drive[i];
      for (std::size_t j = 0; j < k; ++j) acc += cell[k - 1 - j] * dc[j * d];
      val[i] = acc / (c_diag(i, i) * delta);
    }
    for (std::size_t c = 0; c < d; ++c)
      if (val[c] < 0.0) ++clipped;
    xi[k] = val;
    if (k < K) fill_drive(k);
  }

  SvePath path;
  path.delta = delta;
  path.seed = seed;
  path.xi = xi;
  path.clip_fraction = static_cast<double>(clipped) / static_cast<double>(K * d);
  path.Xi = Grid<Vec>(delta, K, Vec(d, 0.0));
  path.M = Grid<Vec>(delta, K, Vec(d, 0.0));
  for (std::size_t k = 1; k <= K; ++k) {
    for (std::size_t c = 0; c < d; ++c) {
      path.Xi[k][c] = path.Xi[k - 1][c] + delta * std::max(xi[k - 1][c], 0.0);
      path.M[k][c] = path.M[k - 1][c] + noise[(k - 1) * d + c];
    }
  }
  return path;
}

SvePath simulate_atom_form(const GridMeasure& Pi, const LimitBaseline& base, double T,
                           std::uint64_t seed) {
  const std::string err = base.validate();
  if (!err.empty()) throw std::invalid_argument("simulate_atom_form: " + err);
  if (Pi.dim() != 1)
    throw std::invalid_argument("simulate_atom_form: implemented for d = 1 only");
  if (base.upsilon.delta != Pi.delta)
    throw std::invalid_argument("simulate_atom_form: grid mismatch");
  const double a = Pi.atom0(0, 0);
  if (a < 0.0) throw std::invalid_argument("simulate_atom_form: atom must be >= 0");

  const double delta = Pi.delta;
  const std::size_t K = grid_steps(delta, T);
  if (K > Pi.n_cells() || K > base.upsilon.steps())
    throw std::invalid_argument("simulate_atom_form: inputs shorter than T");

  Rng rng(seed);
  std::vector<double> dM(K + 1, 0.0), dXi(K + 1, 0.0);
  std::size_t clipped = 0;

  // With an atom the step increment solves dXi = C + a * (B(Xi + dXi) - B(Xi)),
  // i.e. dXi is the first passage of x - a B(x) over the level C. Solving the
  // scalar quadratic with a single normal draw leaves an O(a^2) mean bias per
  // step (the root correlates with the draw), so the step is sampled from the
  // exact first-passage law instead: inverse Gaussian with mean C and shape
  // C^2 / a^2. dM = (dXi - C) / a keeps the pair consistent and centered.
  for (std::size_t k = 1; k <= K; ++k) {
    const double d_ups = base.has_prime() ? delta * base.upsilon_prime[k - 1][0]
                                          : base.upsilon[k][0] - base.upsilon[k - 1][0];
    double hist = 0.0;
    for (std::size_t i = 1; i < k; ++i) hist += Pi.cells[i - 1](0, 0) * dM[k - i];
    const double C = d_ups + hist;
    if (a == 0.0) {
      const double Z = rng.normal();
      double x = C;
      if (x < 0.0) {
        ++clipped;
        x = 0.0;
      }
      dXi[k] = x;
      dM[k] = std::sqrt(x) * Z;
      continue;
    }
    if (C <= 0.0) {
      // the level is already passed at zero: no growth, the consistency
      // relation pins the martingale increment
      ++clipped;
      dXi[k] = 0.0;
      dM[k] = -C / a;
      continue;
    }
    // Michael-Schucany-Haas inverse Gaussian sampler
    const double mu = C, lambda = C * C / (a * a);
    const double Z = rng.normal();
    const double nu = Z * Z;
    double x = mu + 0.5 * mu * mu * nu / lambda -
               0.5 * (mu / lambda) * std::sqrt(4.0 * mu * lambda * nu + mu * mu * nu * nu);
    if (!(x > 0.0)) x = 1e-300;
    if (rng.uniform() > mu / (mu + x)) x = mu * mu / x;
    dXi[k] = x;
    dM[k] = (x - C) / a;
  }

  SvePath path;
  path.delta = delta;
  path.seed = seed;
  path.clip_fraction = static_cast<double>(clipped) / static_cast<double>(K);
  path.Xi = Grid<Vec>(delta, K, Vec(1, 0.0));
  path.M = Grid<Vec>(delta, K, Vec(1, 0.0));
  path.Xi[0][0] = base.upsilon[0][0];
  for (std::size_t k = 1; k <= K; ++k) {
    path.Xi[k][0] = path.Xi[k - 1][0] + dXi[k];
    path.M[k][0] = path.M[k - 1][0] + dM[k];
  }
  return path;
}

SvePath simulate_pi0_form(const GridMeasure& Pi0_cells, const Matrix& bPhi,
                          const LimitBaseline& base, double T, std::uint64_t seed) {
  if (Pi0_cells.atom0.max_abs() != 0.0)
    throw std::invalid_argument("simulate_pi0_form: kernel must be atomless");
  if (base.gamma_prime.values.empty())
    throw std::invalid_argument("simulate_pi0_form: Gamma' required");
  if (base.gamma_prime.delta != Pi0_cells.delta)
    throw std::invalid_argument("simulate_pi0_form: grid mismatch");
  const std::size_t d = Pi0_cells.dim();
  if (bPhi.rows() != d || bPhi.cols() != d)
    throw std::invalid_argument("simulate_pi0_form: bPhi shape mismatch");

  const double delta = Pi0_cells.delta;
  const std::size_t K = grid_steps(delta, T);
  if (K > Pi0_cells.n_cells() || K > base.gamma_prime.steps())
    throw std::invalid_argument("simulate_pi0_form: inputs shorter than T");
  const std::vector<double> w = flatten_cells(Pi0_cells);
  const double sq_delta = std::sqrt(delta);

  Rng rng(seed);
  Grid<Vec> xi(delta, K, Vec(d, 0.0));
  std::vector<double> drive(K * d, 0.0);  // (Gamma'_j - bPhi xi_j) delta + sqrt(xi_j^+) dB_j
  std::vector<double> noise(K * d, 0.0);
  std::size_t clipped = 0;

  auto fill_drive = [&](std::size_t j) {
    const Vec bx = bPhi * xi[j];
    for (std::size_t c = 0; c < d; ++c) {
      const double v = std::max(xi[j][c], 0.0);
      const double dB = sq_delta * rng.normal();
      noise[j * d + c] = std::sqrt(v) * dB;
      drive[j * d + c] = (base.gamma_prime[j][c] - bx[c]) * delta + std::sqrt(v) * dB;
    }
  };

  fill_drive(0);  // xi(0) = 0
  for (std::size_t k = 1; k <= K; ++k) {
    Vec val(d, 0.0);
    for (std::size_t i = 0; i < d; ++i) {
      double acc = 0.0;
      for (std::size_t c = 0; c < d; ++c) {
        const double* wc = &w[(i * d + c) * Pi0_cells.n_cells()];
        const double* dc = &drive[c];
        for (std::size_t j = 0; j < k; ++j) acc += wc[k - 1 - j] * dc[j * d];
      }
      val[i] = acc / delta;
    }
    for (std::size_t c = 0; c < d; ++c)
      if (val[c] < 0.0) ++clipped;
    xi[k] = val;
    if (k < K) fill_drive(k);
  }

  SvePath path;
  path.delta = delta;
  path.seed = seed;
  path.xi = xi;
  path.clip_fraction = static_cast<double>(clipped) / static_cast<double>(K * d);
  path.Xi = Grid<Vec>(delta, K, Vec(d, 0.0));
  path.M = Grid<Vec>(delta, K, Vec(d, 0.0));
  for (std::size_t k = 1; k <= K; ++k)
    for (std::size_t c = 0; c < d; ++c) {
      path.Xi[k][c] = path.Xi[k - 1][c] + delta * std::max(xi[k - 1][c], 0.0);
      path.M[k][c] = path.M[k - 1][c] + noise[(k - 1) * d + c];
    }
  return path;
}

Grid<Vec> deterministic_mean_pi0(const GridMeasure& Pi0_cells, const Matrix& bPhi,
                                 const Grid<Vec>& gamma_prime, double T) {
  const std::size_t d = Pi0_cells.dim();
  const double delta = Pi0_cells.delta;
  const std::size_t K = grid_steps(delta, T);
  Grid<Vec> m(delta, K, Vec(d, 0.0));
  for (std::size_t k = 1; k <= K; ++k) {
    Vec val(d, 0.0);
    for (std::size_t i = 0; i < d; ++i) {
      double acc = 0.0;
      for (std::size_t j = 0; j < k; ++j) {
        const Matrix& cell = Pi0_cells.cells[k - 1 - j];
        const Vec bm = bPhi * m[j];
        for (std::size_t c = 0; c < d; ++c) acc += cell(i, c) * (gamma_prime[j][c] - bm[c]);
      }
      val[i] = acc;
    }
    m[k] = val;
  }
  return m;
}

Cx sve_functional(const SvePath& path, const TestFunctions& tf, double T) {
  const double delta = path.delta;
  const std::size_t kT = grid_steps(delta, T);
  if (kT > path.Xi.steps() || tf.f.delta != delta || kT > tf.f.steps())
    throw std::invalid_argument("sve_functional: grid mismatch");
  const std::size_t d = path.Xi[0].size();
  Cx acc = dot(tf.f[kT], path.Xi[0]);  // jump of Xi at zero
  for (std::size_t k = 1; k <= kT; ++k) {
    const CxVec& fv = tf.f[kT - k];
    const CxVec& hv = tf.h[kT - k];
    for (std::size_t c = 0; c < d; ++c) {
      acc += fv[c] * (path.Xi[k][c] - path.Xi[k - 1][c]);
      acc += hv[c] * (path.M[k][c] - path.M[k - 1][c]);
    }
  }
  return acc;
}

CharacteristicCheck limit_characteristic_check(
    const std::function<SvePath(std::size_t)>& make_path, std::size_t n_paths,
    const TestFunctions& tf, const RiccatiSolution& limit_solution, const Grid<Vec>& Upsilon,
    double T) {
  if (n_paths == 0) throw std::invalid_argument("limit_characteristic_check: no paths");
  Cx mean(0.0, 0.0);
  double m2 = 0.0;
  std::vector<Cx> vals(n_paths);
  for (std::size_t p = 0; p < n_paths; ++p) {
    vals[p] = std::exp(sve_functional(make_path(p), tf, T));
    mean += vals[p];
  }
  mean /= static_cast<double>(n_paths);
  for (const Cx& v : vals) {
    const Cx dv = v - mean;
    m2 += dv.real() * dv.real() + dv.imag() * dv.imag();
  }
  CharacteristicCheck chk;
  chk.mc_mean = mean;
  chk.std_err = std::sqrt(m2 / std::max<std::size_t>(1, n_paths - 1) /
                          static_cast<double>(n_paths));
  chk.analytic = fourier_laplace_limit(limit_solution, Upsilon, T);
  chk.gap = std::abs(mean - chk.analytic);
  chk.z = (chk.std_err > 0.0) ? chk.gap / chk.std_err : 0.0;
  return chk;
}

}  // namespace hawkvol
