#include "hawkvol/quadrature.hpp"

#include <cmath>
#include <stdexcept>

namespace hawkvol {

namespace {

// Gauss-Kronrod (7,15) nodes and weights on [-1, 1]. Odd-index nodes form the
// embedded Gauss-7 rule.
constexpr double kKronrodNodes[8] = {0.991455371120812639206854697526329,
                                     0.949107912342758524526189684047851,
                                     0.864864423359769072789712788640926,
                                     0.741531185599394439863864773280788,
                                     0.586087235467691130294144838258730,
                                     0.405845151377397166906606412076961,
                                     0.207784955007898467600689403773245,
                                     0.0};
constexpr double kKronrodWeights[8] = {0.022935322010529224963732008058970,
                                       0.063092092629978553290700663189204,
                                       0.104790010322250183839876322541518,
                                       0.140653259715525918745189590510238,
                                       0.169004726639267902826583426598550,
                                       0.190350578064785409913256402421014,
                                       0.204432940075298892414161999234649,
                                       0.209482141084727828012999174891714};
constexpr double kGaussWeights[4] = {0.129484966168869693270611432679082,
                                     0.279705391489276667901467771423780,
                                     0.381830050505118944950369775488975,
                                     0.417959183673469387755102040816327};

struct PanelResult {
  double kronrod;
  double err;
};

PanelResult gk15(const std::function<double(double)>& f, double a, double b) {
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  double kr = 0.0, gs = 0.0;
  for (int i = 0; i < 8; ++i) {
    const double x = h * kKronrodNodes[i];
    const double fv = (i == 7) ? f(c) : f(c - x) + f(c + x);
    kr += kKronrodWeights[i] * fv;
    if (i % 2 == 1) gs += kGaussWeights[i / 2] * fv;
    else if (i == 7) gs += kGaussWeights[3] * fv;
  }
  return {kr * h, std::abs(kr - gs) * h};
}

double adapt(const std::function<double(double)>& f, double a, double b, double tol,
             double floor_scale, int depth) {
  const PanelResult r = gk15(f, a, b);
  if (r.err <= tol * std::max(std::abs(r.kronrod), floor_scale) || depth > 48)
    return r.kronrod;
  const double m = 0.5 * (a + b);
  return adapt(f, a, m, tol, floor_scale, depth + 1) +
         adapt(f, m, b, tol, floor_scale, depth + 1);
}

}  // namespace

double integrate(const std::function<double(double)>& f, double a, double b, double rel_tol) {
  if (!(b >= a)) throw std::invalid_argument("integrate: b < a");
  if (a == b) return 0.0;
  const PanelResult first = gk15(f, a, b);
  const double scale = std::max(std::abs(first.kronrod), 1e-300);
  return adapt(f, a, b, rel_tol, scale * 1e-3, 0);
}

double power_exp_mass(double alpha, double beta, double t0, double t1) {
  if (alpha <= 0.0) throw std::invalid_argument("power_exp_mass: alpha must be > 0");
  if (beta < 0.0) throw std::invalid_argument("power_exp_mass: beta must be >= 0");
  if (!(t1 > t0) || t0 < 0.0) throw std::invalid_argument("power_exp_mass: need 0 <= t0 < t1");
  if (beta == 0.0) return (std::pow(t1, alpha) - std::pow(t0, alpha)) / alpha;

  auto series_0_to = [&](double T) {
    // sum_k (-beta)^k T^(alpha+k) / (k! (alpha+k)); rapid for beta*T <= 1
    double term = std::pow(T, alpha);
    double sum = term / alpha;
    for (int k = 1; k < 60; ++k) {
      term *= -beta * T / k;
      const double add = term / (alpha + k);
      sum += add;
      if (std::abs(add) < 1e-16 * std::abs(sum)) break;
    }
    return sum;
  };

  const double t_series = 1.0 / beta;
  auto f = [&](double t) { return std::pow(t, alpha - 1.0) * std::exp(-beta * t); };

  if (t0 == 0.0) {
    const double ts = std::min(t1, t_series);
    double total = series_0_to(ts);
    if (t1 > ts) total += integrate(f, ts, t1, 1e-12);
    return total;
  }
  if (t1 <= t_series) return series_0_to(t1) - series_0_to(t0);
  return integrate(f, t0, t1, 1e-12);
}

std::vector<double> gaver_stehfest_weights(int n) {
  if (n <= 0 || n % 2 != 0 || n > 18)
    throw std::invalid_argument("gaver_stehfest_weights: n must be even, 2..18");
  const int half = n / 2;
  auto fact = [](int k) {
    double f = 1.0;
    for (int i = 2; i <= k; ++i) f *= i;
    return f;
  };
  std::vector<double> w(n + 1, 0.0);
  for (int i = 1; i <= n; ++i) {
    double s = 0.0;
    for (int k = (i + 1) / 2; k <= std::min(i, half); ++k) {
      s += std::pow(static_cast<double>(k), half) * fact(2 * k) /
           (fact(half - k) * fact(k) * fact(k - 1) * fact(i - k) * fact(2 * k - i));
    }
    w[i] = ((half + i) % 2 == 0 ? 1.0 : -1.0) * s;
  }
  return w;
}

double gaver_stehfest(const std::function<double(double)>& laplace, double t,
                      const std::vector<double>& weights) {
  if (!(t > 0.0)) throw std::invalid_argument("gaver_stehfest: t must be > 0");
  const double ln2_t = std::log(2.0) / t;
  double s = 0.0;
  for (std::size_t k = 1; k < weights.size(); ++k)
    s += weights[k] * laplace(static_cast<double>(k) * ln2_t);
  return ln2_t * s;
}

}  // namespace hawkvol
