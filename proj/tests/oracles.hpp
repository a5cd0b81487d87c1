#pragma once

// Test-only reference implementations, deliberately independent of the
// library's algorithms: characteristic-polynomial eigenvalues (d <= 3),
// Gaussian elimination without pivot-reuse tricks, RK4, adaptive Simpson,
// and a brute-force Volterra stepper.

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <stdexcept>
#include <vector>

#include "hawkvol/matrix.hpp"

namespace oracles {

// All eigenvalue moduli of a d x d matrix, d <= 3, via closed-form roots of
// the characteristic polynomial.
inline std::vector<double> eigen_moduli(const hawkvol::Matrix& A) {
  const std::size_t d = A.rows();
  if (d == 1) return {std::abs(A(0, 0))};
  if (d == 2) {
    const double tr = A(0, 0) + A(1, 1);
    const double det = A(0, 0) * A(1, 1) - A(0, 1) * A(1, 0);
    const std::complex<double> disc = std::sqrt(std::complex<double>(tr * tr - 4.0 * det, 0.0));
    return {std::abs((tr + disc) / 2.0), std::abs((tr - disc) / 2.0)};
  }
  if (d == 3) {
    // lambda^3 - c2 lambda^2 + c1 lambda - c0
    const double c2 = A(0, 0) + A(1, 1) + A(2, 2);
    const double c1 = A(0, 0) * A(1, 1) - A(0, 1) * A(1, 0) + A(0, 0) * A(2, 2) -
                      A(0, 2) * A(2, 0) + A(1, 1) * A(2, 2) - A(1, 2) * A(2, 1);
    const double c0 = A(0, 0) * (A(1, 1) * A(2, 2) - A(1, 2) * A(2, 1)) -
                      A(0, 1) * (A(1, 0) * A(2, 2) - A(1, 2) * A(2, 0)) +
                      A(0, 2) * (A(1, 0) * A(2, 1) - A(1, 1) * A(2, 0));
    // depressed cubic t^3 + pt + q with lambda = t + c2/3
    const double p = c1 - c2 * c2 / 3.0;
    const double q = -2.0 * c2 * c2 * c2 / 27.0 + c2 * c1 / 3.0 - c0;
    const std::complex<double> sq = std::sqrt(std::complex<double>(q * q / 4.0 + p * p * p / 27.0, 0.0));
    std::complex<double> u = std::pow(-q / 2.0 + sq, 1.0 / 3.0);
    if (std::abs(u) < 1e-30) u = std::pow(-q / 2.0 - sq, 1.0 / 3.0);
    std::vector<double> mods;
    const std::complex<double> w(-0.5, std::sqrt(3.0) / 2.0);
    std::complex<double> uk = u;
    for (int k = 0; k < 3; ++k) {
      const std::complex<double> t = (std::abs(uk) < 1e-30)
                                         ? std::complex<double>(0.0, 0.0)
                                         : uk - p / (3.0 * uk);
      mods.push_back(std::abs(t + c2 / 3.0));
      uk *= w;
    }
    return mods;
  }
  throw std::invalid_argument("eigen_moduli: d <= 3 only");
}

inline double spectral_radius_charpoly(const hawkvol::Matrix& A) {
  const auto mods = eigen_moduli(A);
  return *std::max_element(mods.begin(), mods.end());
}

// Plain Gauss-Jordan inverse with partial pivoting.
inline hawkvol::Matrix gauss_inverse(const hawkvol::Matrix& A) {
  const std::size_t n = A.rows();
  hawkvol::Matrix W(n, 2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) W(i, j) = A(i, j);
    W(i, n + i) = 1.0;
  }
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    for (std::size_t i = k + 1; i < n; ++i)
      if (std::abs(W(i, k)) > std::abs(W(piv, k))) piv = i;
    if (W(piv, k) == 0.0) throw std::runtime_error("gauss_inverse: singular");
    if (piv != k)
      for (std::size_t j = 0; j < 2 * n; ++j) std::swap(W(k, j), W(piv, j));
    const double d = W(k, k);
    for (std::size_t j = 0; j < 2 * n; ++j) W(k, j) /= d;
    for (std::size_t i = 0; i < n; ++i) {
      if (i == k || W(i, k) == 0.0) continue;
      const double f = W(i, k);
      for (std::size_t j = 0; j < 2 * n; ++j) W(i, j) -= f * W(k, j);
    }
  }
  hawkvol::Matrix inv(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) inv(i, j) = W(i, n + j);
  return inv;
}

// Adaptive Simpson quadrature, recursion-based.
inline double simpson(const std::function<double(double)>& f, double a, double b, double tol,
                      int depth = 0) {
  const double m = 0.5 * (a + b);
  const double fa = f(a), fm = f(m), fb = f(b);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  std::function<double(double, double, double, double, double, double, int)> rec =
      [&](double x0, double x2, double fx0, double fx1, double fx2, double acc, int dep) {
        const double x1l = 0.5 * (x0 + 0.5 * (x0 + x2));
        const double xm = 0.5 * (x0 + x2);
        const double x1r = 0.5 * (xm + x2);
        const double fl = f(x1l), fr = f(x1r);
        const double left = (xm - x0) / 6.0 * (fx0 + 4.0 * fl + fx1);
        const double right = (x2 - xm) / 6.0 * (fx1 + 4.0 * fr + fx2);
        if (dep > 40 || std::abs(left + right - acc) < 15.0 * tol)
          return left + right + (left + right - acc) / 15.0;
        return rec(x0, xm, fx0, fl, fx1, left, dep + 1) +
               rec(xm, x2, fx1, fr, fx2, right, dep + 1);
      };
  return rec(a, b, fa, fm, fb, whole, depth);
}

// Classic RK4 for dy/dt = f(t, y).
inline std::vector<double> rk4(const std::function<std::vector<double>(double, const std::vector<double>&)>& f,
                               std::vector<double> y, double t0, double t1, int steps) {
  const double h = (t1 - t0) / steps;
  double t = t0;
  auto axpy = [](std::vector<double> a, const std::vector<double>& b, double s) {
    for (std::size_t i = 0; i < a.size(); ++i) a[i] += s * b[i];
    return a;
  };
  for (int k = 0; k < steps; ++k) {
    const auto k1 = f(t, y);
    const auto k2 = f(t + h / 2, axpy(y, k1, h / 2));
    const auto k3 = f(t + h / 2, axpy(y, k2, h / 2));
    const auto k4 = f(t + h, axpy(y, k3, h));
    for (std::size_t i = 0; i < y.size(); ++i)
      y[i] += h / 6.0 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
    t += h;
  }
  return y;
}

}  // namespace oracles
