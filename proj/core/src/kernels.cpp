#include "hawkvol/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "hawkvol/errors.hpp"
#include "hawkvol/quadrature.hpp"

namespace hawkvol {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// truncation point T with integrable-majorant tail below tol_abs
double powerlaw_tail_cut(double a, double kappa, double tilt, double tol_abs) {
  double T = 1.0;
  for (int i = 0; i < 400; ++i) {
    const double tail = (tilt > 0.0)
                            ? a * kappa * std::pow(1.0 + T, -kappa - 1.0) * std::exp(-tilt * T) / tilt
                            : a * std::pow(1.0 + T, -kappa);
    if (tail < tol_abs) return T;
    T *= 1.5;
  }
  throw NumericalError("powerlaw: tail truncation did not settle (divergent parameters?)");
}

}  // namespace

KernelTerm KernelTerm::exponential(double a, double b) {
  KernelTerm t;
  t.family = Family::exponential;
  t.a = a;
  t.b = b;
  return t;
}

KernelTerm KernelTerm::powerlaw(double a, double kappa, double tilt) {
  KernelTerm t;
  t.family = Family::powerlaw;
  t.a = a;
  t.kappa = kappa;
  t.b = tilt;
  return t;
}

KernelTerm KernelTerm::gammaish(double a, double alpha, double beta) {
  KernelTerm t;
  t.family = Family::gammaish;
  t.a = a;
  t.alpha = alpha;
  t.b = beta;
  return t;
}

KernelTerm KernelTerm::histogram(std::vector<double> edges, std::vector<double> levels) {
  KernelTerm t;
  t.family = Family::histogram;
  t.a = 1.0;
  t.edges = std::move(edges);
  t.levels = std::move(levels);
  return t;
}

std::string KernelTerm::validate() const {
  switch (family) {
    case Family::zero:
      return {};
    case Family::exponential:
      if (a < 0.0) return "exponential: a must be >= 0";
      if (a > 0.0 && b <= 0.0) return "exponential: b must be > 0";
      return {};
    case Family::powerlaw:
      if (a < 0.0) return "powerlaw: a must be >= 0";
      if (a > 0.0 && kappa <= 0.0) return "powerlaw: kappa must be > 0";
      if (b < 0.0) return "powerlaw: tilt must be >= 0";
      return {};
    case Family::gammaish:
      if (a < 0.0) return "gammaish: a must be >= 0";
      if (a > 0.0 && (alpha <= 0.0 || b <= 0.0)) return "gammaish: alpha and beta must be > 0";
      return {};
    case Family::histogram: {
      if (edges.size() < 2 || levels.size() + 1 != edges.size())
        return "histogram: need edges.size() == levels.size() + 1 >= 2";
      if (edges.front() < 0.0) return "histogram: edges must be >= 0";
      for (std::size_t i = 1; i < edges.size(); ++i)
        if (!(edges[i] > edges[i - 1])) return "histogram: edges must be increasing";
      for (double v : levels)
        if (v < 0.0 || !std::isfinite(v)) return "histogram: levels must be finite and >= 0";
      return {};
    }
  }
  return "unknown family";
}

double KernelTerm::value(double t) const {
  if (t < 0.0) return 0.0;
  switch (family) {
    case Family::zero:
      return 0.0;
    case Family::exponential:
      return a * std::exp(-b * t);
    case Family::powerlaw:
      return a * kappa * std::pow(1.0 + t, -kappa - 1.0) * std::exp(-b * t);
    case Family::gammaish: {
      if (a == 0.0) return 0.0;
      if (t == 0.0) {
        if (alpha < 1.0) return kInf;
        if (alpha == 1.0) return a * b;
        return 0.0;
      }
      return a * std::exp(alpha * std::log(b) + (alpha - 1.0) * std::log(t) - b * t -
                          std::lgamma(alpha));
    }
    case Family::histogram: {
      if (edges.empty() || t <= edges.front() || t > edges.back()) {
        // half-open cells (e_{i-1}, e_i]; a left edge at 0 picks up cell 0
        if (!edges.empty() && t == edges.front() && edges.front() == 0.0 && !levels.empty())
          return levels.front();
        return 0.0;
      }
      const auto it = std::lower_bound(edges.begin(), edges.end(), t);
      const std::size_t i = static_cast<std::size_t>(it - edges.begin());
      return levels[i - 1];
    }
  }
  return 0.0;
}

double KernelTerm::l1() const {
  switch (family) {
    case Family::zero:
      return 0.0;
    case Family::exponential:
      return (a == 0.0) ? 0.0 : a / b;
    case Family::powerlaw: {
      if (a == 0.0) return 0.0;
      if (b == 0.0) return a;
      const double T = powerlaw_tail_cut(a, kappa, b, 1e-14 * std::max(a, 1e-30));
      return integrate([&](double t) { return value(t); }, 0.0, T, 1e-11);
    }
    case Family::gammaish:
      return a;
    case Family::histogram: {
      double s = 0.0;
      for (std::size_t i = 0; i < levels.size(); ++i) s += levels[i] * (edges[i + 1] - edges[i]);
      return s;
    }
  }
  return 0.0;
}

double KernelTerm::laplace(double lambda) const {
  if (lambda < 0.0) throw std::invalid_argument("kernel laplace: lambda must be >= 0");
  if (lambda == 0.0) return l1();
  switch (family) {
    case Family::zero:
      return 0.0;
    case Family::exponential:
      return (a == 0.0) ? 0.0 : a / (b + lambda);
    case Family::powerlaw: {
      if (a == 0.0) return 0.0;
      const double tilt = b + lambda;
      const double T = powerlaw_tail_cut(a, kappa, tilt, 1e-14 * std::max(a, 1e-30));
      return integrate([&](double t) { return value(t) * std::exp(-lambda * t); }, 0.0, T, 1e-11);
    }
    case Family::gammaish:
      // integral has the closed form a (b / (b + lambda))^alpha
      return (a == 0.0) ? 0.0 : a * std::exp(alpha * (std::log(b) - std::log(b + lambda)));
    case Family::histogram: {
      double s = 0.0;
      for (std::size_t i = 0; i < levels.size(); ++i)
        s += levels[i] * (std::exp(-lambda * edges[i]) - std::exp(-lambda * edges[i + 1])) / lambda;
      return s;
    }
  }
  return 0.0;
}

double KernelTerm::mass(double t0, double t1) const {
  if (!(t1 > t0)) return 0.0;
  switch (family) {
    case Family::zero:
      return 0.0;
    case Family::exponential:
      return (a == 0.0) ? 0.0 : (a / b) * (std::exp(-b * t0) - std::exp(-b * t1));
    case Family::powerlaw: {
      if (a == 0.0) return 0.0;
      if (b == 0.0) return a * (std::pow(1.0 + t0, -kappa) - std::pow(1.0 + t1, -kappa));
      return integrate([&](double t) { return value(t); }, t0, t1, 1e-11);
    }
    case Family::gammaish:
      if (a == 0.0) return 0.0;
      return a * std::exp(alpha * std::log(b) - std::lgamma(alpha)) *
             power_exp_mass(alpha, b, t0, t1);
    case Family::histogram: {
      double s = 0.0;
      for (std::size_t i = 0; i < levels.size(); ++i) {
        const double lo = std::max(t0, edges[i]), hi = std::min(t1, edges[i + 1]);
        if (hi > lo) s += levels[i] * (hi - lo);
      }
      return s;
    }
  }
  return 0.0;
}

double KernelTerm::mode() const {
  if (family == Family::gammaish && alpha > 1.0) return (alpha - 1.0) / b;
  return 0.0;
}

double KernelTerm::sup_on(double l0, double l1) const {
  if (l1 < l0) return 0.0;
  switch (family) {
    case Family::zero:
      return 0.0;
    case Family::exponential:
    case Family::powerlaw:
      return value(l0);
    case Family::gammaish: {
      if (alpha <= 1.0) return value(l0);  // +inf at l0 == 0 for alpha < 1
      const double m = mode();
      if (m >= l0 && m <= l1) return value(m);
      return std::max(value(l0), value(l1));
    }
    case Family::histogram: {
      double s = 0.0;
      for (std::size_t i = 0; i < levels.size(); ++i)
        if (edges[i + 1] > l0 && edges[i] < l1) s = std::max(s, levels[i]);
      return s;
    }
  }
  return 0.0;
}

bool KernelTerm::singular_at_zero() const {
  return family == Family::gammaish && a > 0.0 && alpha < 1.0;
}

bool KernelEntry::zero() const {
  for (const KernelTerm& t : terms)
    if (t.family != KernelTerm::Family::zero && t.a != 0.0) return false;
  return true;
}

double KernelEntry::value(double t) const {
  double s = 0.0;
  for (const KernelTerm& k : terms) s += k.value(t);
  return s;
}

double KernelEntry::l1() const {
  double s = 0.0;
  for (const KernelTerm& k : terms) s += k.l1();
  return s;
}

double KernelEntry::laplace(double lambda) const {
  double s = 0.0;
  for (const KernelTerm& k : terms) s += k.laplace(lambda);
  return s;
}

double KernelEntry::mass(double t0, double t1) const {
  double s = 0.0;
  for (const KernelTerm& k : terms) s += k.mass(t0, t1);
  return s;
}

double KernelEntry::sup_on(double l0, double l1) const {
  double s = 0.0;
  for (const KernelTerm& k : terms) s += k.sup_on(l0, l1);
  return s;
}

bool KernelEntry::singular_at_zero() const {
  for (const KernelTerm& k : terms)
    if (k.singular_at_zero()) return true;
  return false;
}

std::string KernelEntry::validate() const {
  for (const KernelTerm& k : terms) {
    const std::string err = k.validate();
    if (!err.empty()) return err;
  }
  return {};
}

Kernel Kernel::scalar(KernelTerm term) {
  Kernel k(1);
  k.at(0, 0).terms.push_back(std::move(term));
  return k;
}

std::string Kernel::validate() const {
  if (d == 0 || entries.size() != d * d) return "kernel: inconsistent dimension";
  for (const KernelEntry& e : entries) {
    const std::string err = e.validate();
    if (!err.empty()) return err;
  }
  return {};
}

bool Kernel::singular_at_zero() const {
  for (const KernelEntry& e : entries)
    if (e.singular_at_zero()) return true;
  return false;
}

double ScalingScheme::gamma() const {
  return std::sqrt(static_cast<double>(n) * theta_n);
}

Matrix l1_norm(const Kernel& phi) {
  Matrix m(phi.d, phi.d);
  for (std::size_t i = 0; i < phi.d; ++i)
    for (std::size_t j = 0; j < phi.d; ++j) m(i, j) = phi.at(i, j).l1();
  if (!m.all_finite()) throw NumericalError("l1_norm: divergent kernel integral");
  return m;
}

Matrix laplace_kernel(const Kernel& phi, double lambda) {
  Matrix m(phi.d, phi.d);
  for (std::size_t i = 0; i < phi.d; ++i)
    for (std::size_t j = 0; j < phi.d; ++j) m(i, j) = phi.at(i, j).laplace(lambda);
  return m;
}

Grid<Matrix> resolvent_grid(const Kernel& phi, double delta, double horizon) {
  const std::string err = phi.validate();
  if (!err.empty()) throw std::invalid_argument("resolvent_grid: " + err);
  const std::size_t K = grid_steps(delta, horizon);
  const std::size_t d = phi.d;

  // kernel samples; singular entries carry cell averages in place of values
  std::vector<Matrix> P(K + 1, Matrix(d, d));
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) {
      const KernelEntry& e = phi.at(i, j);
      if (e.zero()) continue;
      const bool avg = e.singular_at_zero();
      for (std::size_t k = 0; k <= K; ++k) {
        const double t = delta * static_cast<double>(k);
        P[k](i, j) = avg ? e.mass(t, t + delta) / delta : e.value(t);
      }
    }

  Grid<Matrix> R(delta, K, Matrix(d, d));
  if (d == 1) {
    // flat fast path: the O(K^2) loop dominates every caller at d = 1
    std::vector<double> p(K + 1), r(K + 1);
    for (std::size_t k = 0; k <= K; ++k) p[k] = P[k](0, 0);
    r[0] = p[0];
    for (std::size_t k = 1; k <= K; ++k) {
      double conv = 0.0;
      for (std::size_t j = 0; j < k; ++j) conv += p[k - j] * r[j];
      r[k] = p[k] + delta * conv;
    }
    for (std::size_t k = 0; k <= K; ++k) R[k](0, 0) = r[k];
    return R;
  }
  R[0] = P[0];
  Matrix conv(d, d);
  for (std::size_t k = 1; k <= K; ++k) {
    conv = Matrix(d, d);
    for (std::size_t j = 0; j < k; ++j) add_prod(conv, P[k - j], R[j]);
    R[k] = P[k] + delta * conv;
  }
  return R;
}

double laplace_identity_check(const Kernel& phi, const Grid<Matrix>& R, double lambda) {
  const std::size_t K = R.steps();
  const std::size_t d = phi.d;
  Matrix LR(d, d);
  for (std::size_t k = 0; k < K; ++k) {
    const double w = std::exp(-lambda * R.delta * static_cast<double>(k)) * R.delta;
    LR += w * R[k];
  }
  const Matrix Lphi = laplace_kernel(phi, lambda);
  return (LR * (Matrix::identity(d) - Lphi) - Lphi).max_abs();
}

Matrix psi_n(const Kernel& phi_n, const ScalingScheme& scheme, double lambda) {
  const Matrix L = laplace_kernel(phi_n, lambda / static_cast<double>(scheme.n));
  return scheme.gamma() * (Matrix::identity(phi_n.d) - L);
}

Matrix varphi_n(const Kernel& phi_n, const Matrix& K, const ScalingScheme& scheme,
                double lambda) {
  const Matrix L = laplace_kernel(phi_n, lambda / static_cast<double>(scheme.n));
  return scheme.gamma() * (K - L);
}

namespace {

// Fine-grid resolvent solve with cell-averaged kernel samples. Point sampling
// biases the discrete kernel mass by O(h), which the near-critical resolvent
// amplifies by 1/(1 - ||phi||); cell averages keep the total mass exact.
Grid<Matrix> resolvent_grid_mass_exact(const Kernel& phi, double h, double horizon) {
  const std::size_t K = grid_steps(h, horizon);
  const std::size_t d = phi.d;
  std::vector<Matrix> P(K + 1, Matrix(d, d));
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) {
      const KernelEntry& e = phi.at(i, j);
      if (e.zero()) continue;
      // P[k] for k >= 1 averages (t_{k-1}, t_k], so h * sum_{k>=1} P[k] is the
      // exact kernel mass seen by the convolution; P[0] only feeds the
      // inhomogeneous term.
      for (std::size_t k = 0; k <= K; ++k) {
        const double lo = (k == 0) ? 0.0 : h * (static_cast<double>(k) - 1.0);
        const double hi = (k == 0) ? h : h * static_cast<double>(k);
        P[k](i, j) = e.mass(lo, hi) / h;
      }
    }
  Grid<Matrix> R(h, K, Matrix(d, d));
  if (d == 1) {
    std::vector<double> p(K + 1), r(K + 1);
    for (std::size_t k = 0; k <= K; ++k) p[k] = P[k](0, 0);
    r[0] = p[0];
    for (std::size_t k = 1; k <= K; ++k) {
      double conv = 0.0;
      for (std::size_t j = 0; j < k; ++j) conv += p[k - j] * r[j];
      r[k] = p[k] + h * conv;
    }
    for (std::size_t k = 0; k <= K; ++k) R[k](0, 0) = r[k];
    return R;
  }
  R[0] = P[0];
  for (std::size_t k = 1; k <= K; ++k) {
    Matrix conv(d, d);
    for (std::size_t j = 0; j < k; ++j) add_prod(conv, P[k - j], R[j]);
    R[k] = P[k] + h * conv;
  }
  return R;
}

}  // namespace

RescaledResolvent rescaled_resolvent(const Kernel& phi_n, const ScalingScheme& scheme,
                                     double delta, double horizon, double fine_delta) {
  const double n = static_cast<double>(scheme.n);
  const std::size_t K = grid_steps(delta, horizon);
  // snap the fine step so rescaled grid points land on fine grid points
  const double big_step = n * delta;
  const std::size_t sub = std::max<std::size_t>(1, grid_steps(fine_delta, big_step));
  const double h = big_step / static_cast<double>(sub);
  const std::size_t fine_K = K * sub;
  if (fine_K > 200000)
    throw NumericalError("rescaled_resolvent: fine grid for R_n exceeds the step cap");

  const Grid<Matrix> Rn = resolvent_grid_mass_exact(phi_n, h, n * horizon);
  const double amp = std::sqrt(n / scheme.theta_n);

  RescaledResolvent out;
  out.values = Grid<Matrix>(delta, K, Matrix(phi_n.d, phi_n.d));
  out.integrated = Grid<Matrix>(delta, K, Matrix(phi_n.d, phi_n.d));
  Matrix acc(phi_n.d, phi_n.d);
  std::size_t f = 0;
  for (std::size_t k = 0; k <= K; ++k) {
    const std::size_t target = k * sub;
    for (; f < target; ++f) acc += h * Rn[f];  // left-rectangle cumulative
    out.values[k] = amp * Rn[target];
    out.integrated[k] = (amp / n) * acc;
  }
  return out;
}

namespace {

bool single_exponential_scalar(const Kernel& phi, double& a, double& b) {
  if (phi.d != 1) return false;
  const KernelEntry& e = phi.at(0, 0);
  if (e.terms.size() != 1 || e.terms[0].family != KernelTerm::Family::exponential) return false;
  a = e.terms[0].a;
  b = e.terms[0].b;
  return true;
}

}  // namespace

GridMeasure rescaled_resolvent_measure(const Kernel& phi_n, const ScalingScheme& scheme,
                                       double delta, double horizon) {
  const std::size_t K = grid_steps(delta, horizon);
  const double n = static_cast<double>(scheme.n);
  const double g = scheme.gamma();
  GridMeasure out;
  out.delta = delta;
  out.atom0 = Matrix(phi_n.d, phi_n.d);
  out.cells.assign(K, Matrix(phi_n.d, phi_n.d));

  double a, b;
  if (single_exponential_scalar(phi_n, a, b)) {
    // resolvent of a e^{-bt} is a e^{-(b-a)t}; integrate over big-time cells
    const double r = b - a;
    for (std::size_t k = 0; k < K; ++k) {
      const double t0 = n * delta * static_cast<double>(k);
      const double t1 = t0 + n * delta;
      const double cell = (r == 0.0) ? a * (t1 - t0) : (a / r) * (std::exp(-r * t0) - std::exp(-r * t1));
      out.cells[k](0, 0) = cell / g;
    }
    return out;
  }

  // general route: Gaver-Stehfest inversion of the integrated transform
  const auto w = gaver_stehfest_weights(12);
  const double ln2 = std::log(2.0);
  auto integrated_at = [&](double t) {
    Matrix acc(phi_n.d, phi_n.d);
    for (std::size_t m = 1; m < w.size(); ++m) {
      const double lam = static_cast<double>(m) * ln2 / t;
      const Matrix L = laplace_kernel(phi_n, lam / n);
      const Matrix Psi = g * (Matrix::identity(phi_n.d) - L);
      const Matrix LR = L * lu_inverse(Psi);  // Laplace transform of R^(n)
      acc += (w[m] / lam) * LR;               // divided by lam: transform of the integral
    }
    return (ln2 / t) * acc;
  };
  Matrix prev(phi_n.d, phi_n.d);
  for (std::size_t k = 1; k <= K; ++k) {
    const Matrix cur = integrated_at(delta * static_cast<double>(k));
    Matrix cell = cur - prev;
    for (std::size_t i = 0; i < phi_n.d; ++i)
      for (std::size_t j = 0; j < phi_n.d; ++j) cell(i, j) = std::max(cell(i, j), 0.0);
    out.cells[k - 1] = cell;
    prev = cur;
  }
  return out;
}

}  // namespace hawkvol
