#pragma once

#include <functional>
#include <vector>

namespace hawkvol {

/// Adaptive Gauss-Kronrod (7,15) panel quadrature on [a, b]; bisects panels
/// until the embedded error estimate meets rel_tol (with a small absolute
/// floor). Integrands must be finite on the open interval.
double integrate(const std::function<double(double)>& f, double a, double b,
                 double rel_tol = 1e-10);

/// integral of t^(alpha-1) e^(-beta t) over [t0, t1]; exact power rule when
/// beta == 0, series near the singular origin otherwise. alpha > 0, beta >= 0,
/// 0 <= t0 < t1.
double power_exp_mass(double alpha, double beta, double t0, double t1);

/// Stehfest weights for Laplace inversion of order n (n even, <= 16):
/// f(t) ~ ln2/t * sum_k w[k] F(k ln2 / t).
std::vector<double> gaver_stehfest_weights(int n);

/// Gaver-Stehfest inversion of F = Laplace transform of f, at time t > 0.
double gaver_stehfest(const std::function<double(double)>& laplace, double t,
                      const std::vector<double>& weights);

}  // namespace hawkvol
