#include "hawkvol/matlin.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "hawkvol/errors.hpp"

namespace hawkvol {

namespace {

double l1_norm(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += std::abs(x);
  return s;
}

// Gelfand estimate rho = lim ||A^k||^{1/k} by repeated squaring with
// rescaling. Sign-agnostic; used as the stall fallback of the power iteration
// and for quasi-triangular blocks that may carry negative entries.
double spectral_radius_gelfand(const Matrix& A) {
  Matrix B = A;
  double t = 0.0;
  double w = 1.0;  // 2^{-j}
  double est = 0.0;
  for (int j = 0; j < 64; ++j) {
    const double c = B.max_abs();
    // c == 0 early means A is nilpotent (A^(2^j) == 0); late it is underflow
    // of an already-converged estimate.
    if (c == 0.0) return (j <= 7) ? 0.0 : est;
    est = std::exp(t + w * std::log(c));
    Matrix S = (1.0 / c) * B;
    B = S * S;
    t += w * std::log(c);
    w *= 0.5;
  }
  return est;
}

struct Eig2 {
  bool complex_pair;
  double re1, im1, re2;  // if complex: re1 +/- i*im1; else re1, re2 real
};

Eig2 eig_2x2(double a, double b, double c, double d) {
  const double tr2 = 0.5 * (a + d);
  const double disc = 0.25 * (a - d) * (a - d) + b * c;
  if (disc >= 0.0) {
    const double s = std::sqrt(disc);
    return {false, tr2 + s, 0.0, tr2 - s};
  }
  return {true, tr2, std::sqrt(-disc), 0.0};
}

}  // namespace

double spectral_radius(const Matrix& A, double tol) {
  if (!A.square()) throw std::invalid_argument("spectral_radius: non-square input");
  if (!A.all_finite()) throw std::invalid_argument("spectral_radius: non-finite entries");
  if (!A.nonnegative()) throw std::invalid_argument("spectral_radius: negative entries");
  if (tol <= 0.0) throw std::invalid_argument("spectral_radius: tol must be > 0");

  const std::size_t n = A.rows();
  if (n == 1) return A(0, 0);

  // Shift makes rho + shift the unique eigenvalue of largest modulus, so the
  // l1 growth factor of the iterates converges for periodic classes too.
  const double shift = 1.0 + A.max_abs();
  const std::size_t cap = 200 * n * n + 200;

  double best = 0.0;
  for (std::size_t s = 0; s < n; ++s) {
    std::vector<double> v(n, 0.0);
    v[s] = 1.0;
    double lam = shift, lam_prev = -1.0;
    int settled = 0;
    for (std::size_t it = 0; it < cap && settled < 3; ++it) {
      std::vector<double> w = A * v;
      for (std::size_t i = 0; i < n; ++i) w[i] += shift * v[i];
      const double nw = l1_norm(w);
      lam = nw;  // ||v||_1 == 1
      for (std::size_t i = 0; i < n; ++i) v[i] = w[i] / nw;
      settled = (std::abs(lam - lam_prev) <= 0.05 * tol * std::max(1.0, lam)) ? settled + 1 : 0;
      lam_prev = lam;
    }
    if (settled >= 3) best = std::max(best, lam - shift);
  }
  best = std::max(best, 0.0);

  // Growth factors converge only like 1/k for defective dominant eigenvalues
  // and can plateau early on strongly reducible graphs; the norm-of-powers
  // estimate arbitrates those stalls.
  const double gel = spectral_radius_gelfand(A);
  if (std::abs(best - gel) <= 10.0 * tol * std::max(1.0, gel)) return std::max(best, gel);
  return gel;
}

namespace {

// Householder similarity reduction to upper Hessenberg, accumulating Q.
void hessenberg(Matrix& H, Matrix& Q) {
  const std::size_t n = H.rows();
  for (std::size_t k = 0; k + 2 < n; ++k) {
    double xnorm = 0.0;
    for (std::size_t i = k + 1; i < n; ++i) xnorm += H(i, k) * H(i, k);
    xnorm = std::sqrt(xnorm);
    if (xnorm == 0.0) continue;
    const double alpha = (H(k + 1, k) >= 0.0) ? -xnorm : xnorm;
    std::vector<double> v(n, 0.0);
    v[k + 1] = H(k + 1, k) - alpha;
    for (std::size_t i = k + 2; i < n; ++i) v[i] = H(i, k);
    double vn2 = 0.0;
    for (std::size_t i = k + 1; i < n; ++i) vn2 += v[i] * v[i];
    if (vn2 == 0.0) continue;
    const double beta = 2.0 / vn2;
    // H <- P H P with P = I - beta v v^T
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t i = k + 1; i < n; ++i) s += v[i] * H(i, j);
      s *= beta;
      for (std::size_t i = k + 1; i < n; ++i) H(i, j) -= s * v[i];
    }
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (std::size_t j = k + 1; j < n; ++j) s += H(i, j) * v[j];
      s *= beta;
      for (std::size_t j = k + 1; j < n; ++j) H(i, j) -= s * v[j];
    }
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (std::size_t j = k + 1; j < n; ++j) s += Q(i, j) * v[j];
      s *= beta;
      for (std::size_t j = k + 1; j < n; ++j) Q(i, j) -= s * v[j];
    }
    for (std::size_t i = k + 2; i < n; ++i) H(i, k) = 0.0;
    H(k + 1, k) = alpha;
  }
}

// One implicit Francis double-shift sweep on rows/cols [l, p] of H.
void francis_sweep(Matrix& H, Matrix& Q, std::size_t l, std::size_t p, bool exceptional,
                   std::size_t iter) {
  const std::size_t n = H.rows();
  double s, t;
  if (!exceptional) {
    s = H(p - 1, p - 1) + H(p, p);
    t = H(p - 1, p - 1) * H(p, p) - H(p - 1, p) * H(p, p - 1);
  } else {
    // ad-hoc shifts to break symmetric stalls
    const double a = std::abs(H(p, p - 1)) + std::abs(H(p - 1, p - 2));
    s = 2.0 * (0.75 + 0.05 * static_cast<double>(iter % 7)) * a;
    t = 0.25 * s * s * (0.9 - 0.05 * static_cast<double>(iter % 5));
  }
  const double x = H(l, l) * H(l, l) + H(l, l + 1) * H(l + 1, l) - s * H(l, l) + t;
  const double y = H(l + 1, l) * (H(l, l) + H(l + 1, l + 1) - s);
  const double z = H(l + 1, l) * H(l + 2, l + 1);

  for (std::size_t k = l; k <= p - 1; ++k) {
    const std::size_t m = std::min<std::size_t>(3, p - k + 1);  // householder length
    double v0, v1, v2;
    if (k == l) {
      v0 = x;
      v1 = y;
      v2 = (m == 3) ? z : 0.0;
    } else {
      v0 = H(k, k - 1);
      v1 = H(k + 1, k - 1);
      v2 = (m == 3) ? H(k + 2, k - 1) : 0.0;
    }
    const double nv = std::sqrt(v0 * v0 + v1 * v1 + v2 * v2);
    if (nv == 0.0) continue;
    const double alpha = (v0 >= 0.0) ? -nv : nv;
    v0 -= alpha;
    const double vn2 = v0 * v0 + v1 * v1 + v2 * v2;
    if (vn2 == 0.0) continue;
    const double beta = 2.0 / vn2;
    const double v[3] = {v0, v1, v2};
    const std::size_t jlo = (k > l) ? k - 1 : l;
    for (std::size_t j = jlo; j < n; ++j) {
      double acc = 0.0;
      for (std::size_t i = 0; i < m; ++i) acc += v[i] * H(k + i, j);
      acc *= beta;
      for (std::size_t i = 0; i < m; ++i) H(k + i, j) -= acc * v[i];
    }
    const std::size_t ihi = std::min(k + m + 1, p + 1);
    for (std::size_t i = 0; i < ihi; ++i) {
      double acc = 0.0;
      for (std::size_t j = 0; j < m; ++j) acc += H(i, k + j) * v[j];
      acc *= beta;
      for (std::size_t j = 0; j < m; ++j) H(i, k + j) -= acc * v[j];
    }
    for (std::size_t i = 0; i < n; ++i) {
      double acc = 0.0;
      for (std::size_t j = 0; j < m; ++j) acc += Q(i, k + j) * v[j];
      acc *= beta;
      for (std::size_t j = 0; j < m; ++j) Q(i, k + j) -= acc * v[j];
    }
    if (k > l)
      for (std::size_t i = k + 1; i < std::min(k + 3, p + 1); ++i) H(i, k - 1) = 0.0;
  }
  // restore Hessenberg zeros introduced by the bulge
  for (std::size_t j = l; j + 2 <= p; ++j)
    for (std::size_t i = j + 2; i <= p; ++i) H(i, j) = 0.0;
}

// Rotates a 2x2 diagonal block with real eigenvalues into triangular form.
void triangularize_2x2(Matrix& H, Matrix& Q, std::size_t q) {
  const std::size_t n = H.rows();
  const double a = H(q, q), b = H(q, q + 1), c = H(q + 1, q), d = H(q + 1, q + 1);
  const Eig2 e = eig_2x2(a, b, c, d);
  if (e.complex_pair) return;
  // eigenvector for e.re1: (a - lam) v0 + b v1 = 0
  double v0, v1;
  if (std::abs(b) + std::abs(a - e.re1) >= std::abs(c) + std::abs(d - e.re1)) {
    v0 = b;
    v1 = e.re1 - a;
  } else {
    v0 = e.re1 - d;
    v1 = c;
  }
  const double nv = std::hypot(v0, v1);
  if (nv == 0.0) return;
  const double cs = v0 / nv, sn = v1 / nv;
  for (std::size_t j = 0; j < n; ++j) {
    const double h0 = H(q, j), h1 = H(q + 1, j);
    H(q, j) = cs * h0 + sn * h1;
    H(q + 1, j) = -sn * h0 + cs * h1;
  }
  for (std::size_t i = 0; i < n; ++i) {
    const double h0 = H(i, q), h1 = H(i, q + 1);
    H(i, q) = cs * h0 + sn * h1;
    H(i, q + 1) = -sn * h0 + cs * h1;
    const double q0 = Q(i, q), q1 = Q(i, q + 1);
    Q(i, q) = cs * q0 + sn * q1;
    Q(i, q + 1) = -sn * q0 + cs * q1;
  }
  H(q + 1, q) = 0.0;
}

// Swaps the 1x1 block at position j+p with the (p x p) block at position j,
// p in {1, 2}, via an orthogonal similarity built from an eigenvector of the
// (p+1) x (p+1) corner. Requires the moving eigenvalue to be simple relative
// to the left block.
void exchange_blocks(Matrix& U, Matrix& Q, std::size_t j, std::size_t p) {
  const std::size_t n = U.rows();
  const std::size_t m = p + 1;
  const double lam = U(j + p, j + p);
  // solve (B1 - lam I) x = -C
  Matrix B(p, p);
  std::vector<double> rhs(p);
  for (std::size_t r = 0; r < p; ++r) {
    for (std::size_t c = 0; c < p; ++c) B(r, c) = U(j + r, j + c);
    B(r, r) -= lam;
    rhs[r] = -U(j + r, j + p);
  }
  std::vector<double> x = lu_solve(B, rhs);
  std::vector<double> v(m);
  for (std::size_t r = 0; r < p; ++r) v[r] = x[r];
  v[p] = 1.0;
  // householder sending v to ||v|| e1
  double nv = 0.0;
  for (double q : v) nv += q * q;
  nv = std::sqrt(nv);
  v[0] -= nv;
  double vn2 = 0.0;
  for (double q : v) vn2 += q * q;
  if (vn2 == 0.0) return;
  const double beta = 2.0 / vn2;
  for (std::size_t col = 0; col < n; ++col) {
    double acc = 0.0;
    for (std::size_t r = 0; r < m; ++r) acc += v[r] * U(j + r, col);
    acc *= beta;
    for (std::size_t r = 0; r < m; ++r) U(j + r, col) -= acc * v[r];
  }
  for (std::size_t row = 0; row < n; ++row) {
    double acc = 0.0;
    for (std::size_t c = 0; c < m; ++c) acc += U(row, j + c) * v[c];
    acc *= beta;
    for (std::size_t c = 0; c < m; ++c) U(row, j + c) -= acc * v[c];
    double qacc = 0.0;
    for (std::size_t c = 0; c < m; ++c) qacc += Q(row, j + c) * v[c];
    qacc *= beta;
    for (std::size_t c = 0; c < m; ++c) Q(row, j + c) -= qacc * v[c];
  }
  for (std::size_t r = 1; r < m; ++r) U(j + r, j) = 0.0;
  U(j, j) = lam;
}

std::vector<std::size_t> block_starts(const Matrix& U, double zero_tol) {
  std::vector<std::size_t> starts;
  const std::size_t n = U.rows();
  std::size_t i = 0;
  while (i < n) {
    starts.push_back(i);
    if (i + 1 < n && std::abs(U(i + 1, i)) > zero_tol) i += 2;
    else i += 1;
  }
  return starts;
}

}  // namespace

SchurResult real_schur(const Matrix& A, double tol) {
  if (!A.square()) throw std::invalid_argument("real_schur: non-square input");
  if (!A.all_finite()) throw std::invalid_argument("real_schur: non-finite entries");
  if (tol <= 0.0) throw std::invalid_argument("real_schur: tol must be > 0");
  const std::size_t n = A.rows();
  if (n > 8) throw std::invalid_argument("real_schur: d <= 8 required");

  Matrix H = A;
  Matrix Q = Matrix::identity(n);
  if (n == 1) return {Q, H};
  hessenberg(H, Q);

  const double scale = std::max(A.max_abs(), 1e-300);
  const double eps = std::max(tol, 1e-15);
  const std::size_t itcap = 200 * n * n;
  std::size_t iters = 0;

  std::size_t p = n - 1;
  std::size_t since_deflation = 0;
  while (p > 0) {
    for (std::size_t i = 1; i <= p; ++i) {
      const double thr = eps * (std::abs(H(i - 1, i - 1)) + std::abs(H(i, i)));
      if (std::abs(H(i, i - 1)) <= std::max(thr, 1e-16 * scale)) H(i, i - 1) = 0.0;
    }
    if (H(p, p - 1) == 0.0) {
      p -= 1;
      since_deflation = 0;
      continue;
    }
    if (p == 1 || H(p - 1, p - 2) == 0.0) {
      triangularize_2x2(H, Q, p - 1);
      p = (p >= 2) ? p - 2 : 0;
      since_deflation = 0;
      continue;
    }
    std::size_t l = p - 1;
    while (l > 0 && H(l, l - 1) != 0.0) --l;
    if (++iters > itcap)
      throw NumericalError("real_schur: QR iteration failed to converge (iteration cap)");
    francis_sweep(H, Q, l, p, (++since_deflation % 12) == 11, iters);
  }

  // order: move 1x1 blocks carrying the spectral radius of a nonnegative
  // input to the front, keeping their original relative order
  if (A.nonnegative()) {
    const double zero_tol = eps * scale * 10.0;
    double r = 0.0;
    for (const std::size_t s : block_starts(H, zero_tol)) {
      if (s + 1 < n && std::abs(H(s + 1, s)) > zero_tol) {
        const Eig2 e = eig_2x2(H(s, s), H(s, s + 1), H(s + 1, s), H(s + 1, s + 1));
        r = std::max(r, std::hypot(e.re1, e.im1));
      } else {
        r = std::max(r, std::abs(H(s, s)));
      }
    }
    const double ord_tol = std::max(std::sqrt(eps), 1e-7) * std::max(1.0, r);
    std::size_t placed = 0;
    bool moved = true;
    while (moved) {
      moved = false;
      const std::vector<std::size_t> starts = block_starts(H, zero_tol);
      for (std::size_t bi = 0; bi < starts.size(); ++bi) {
        const std::size_t s = starts[bi];
        const bool two = (s + 1 < n && std::abs(H(s + 1, s)) > zero_tol);
        if (two || std::abs(H(s, s) - r) > ord_tol) continue;
        if (s <= placed) {
          if (s == placed) placed += 1;
          continue;
        }
        // bubble this rho-block one position left
        const std::size_t prev = starts[bi - 1];
        exchange_blocks(H, Q, prev, s - prev);
        moved = true;
        break;
      }
    }
  }

  // hard zeros below the quasi-triangular profile
  for (std::size_t j = 0; j + 2 < n; ++j)
    for (std::size_t i = j + 2; i < n; ++i) H(i, j) = 0.0;

  return {Q, H};
}

Matrix block_inverse_2x2(const Matrix& A11, const Matrix& A12, const Matrix& A21,
                         const Matrix& A22) {
  const std::size_t p = A11.rows(), q = A22.rows();
  if (!A11.square() || !A22.square() || A12.rows() != p || A12.cols() != q ||
      A21.rows() != q || A21.cols() != p)
    throw std::invalid_argument("block_inverse_2x2: inconsistent block shapes");

  const Matrix A22inv = lu_inverse(A22);
  const Matrix S = A11 - A12 * A22inv * A21;  // Schur complement of A22
  const Matrix Sinv = lu_inverse(S);

  Matrix inv(p + q, p + q);
  inv.set_block(0, 0, Sinv);
  inv.set_block(0, p, -1.0 * (Sinv * A12 * A22inv));
  inv.set_block(p, 0, -1.0 * (A22inv * A21 * Sinv));
  inv.set_block(p, p, A22inv + A22inv * A21 * Sinv * A12 * A22inv);

  Matrix M(p + q, p + q);
  M.set_block(0, 0, A11);
  M.set_block(0, p, A12);
  M.set_block(p, 0, A21);
  M.set_block(p, p, A22);
  const double resid = (M * inv - Matrix::identity(p + q)).max_abs();
  const double cond_scale = std::max(1.0, M.max_abs() * inv.max_abs());
  if (!(resid <= 1e-10 * cond_scale))
    throw NumericalError("block_inverse_2x2: residual too large (ill-conditioned blocks)");
  return inv;
}

AdmissibleStructure build_admissible(const Matrix& K, double tol, double lambda_plus) {
  if (!K.square()) throw std::invalid_argument("build_admissible: non-square K");
  if (!K.nonnegative()) throw std::invalid_argument("build_admissible: K has negative entries");
  if (tol <= 0.0) throw std::invalid_argument("build_admissible: tol must be > 0");
  const double rho = spectral_radius(K, std::min(tol, 1e-10));
  if (std::abs(rho - 1.0) > tol)
    throw std::invalid_argument("build_admissible: spectral radius of K not within tol of 1");

  SchurResult sr = real_schur(K, std::min(tol, 1e-10));
  const std::size_t n = K.rows();
  const double ord_tol = std::max(std::sqrt(std::min(tol, 1e-10)), 1e-7);
  std::size_t ell = 0;
  while (ell < n && std::abs(sr.U(ell, ell) - 1.0) <= ord_tol &&
         (ell + 1 >= n || std::abs(sr.U(ell + 1, ell)) <= ord_tol))
    ++ell;
  if (ell == 0) throw NumericalError("build_admissible: no leading eigenvalue-1 block found");

  // With a semisimple eigenvalue 1 the leading Schur vectors span its
  // eigenspace, so U_II can only differ from Id by roundoff. A defective
  // eigenvalue leaves genuine nilpotent mass there and no orthogonal Q fixes
  // it.
  double defect = 0.0;
  for (std::size_t i = 0; i < ell; ++i)
    for (std::size_t j = 0; j < ell; ++j)
      defect = std::max(defect, std::abs(sr.U(i, j) - (i == j ? 1.0 : 0.0)));
  if (defect > std::max(tol, 1e-7))
    throw NumericalError("build_admissible: eigenvalue 1 is defective, U_II cannot equal Id");

  for (std::size_t i = 0; i < ell; ++i)
    for (std::size_t j = 0; j < ell; ++j) sr.U(i, j) = (i == j) ? 1.0 : 0.0;
  for (std::size_t i = ell; i < n; ++i)
    for (std::size_t j = 0; j < ell; ++j) sr.U(i, j) = 0.0;

  AdmissibleStructure s{K, ell, sr.Q, sr.U, lambda_plus};
  const std::string err = verify_admissible(s, std::max(tol, 1e-8));
  if (!err.empty()) throw NumericalError("build_admissible: " + err);
  return s;
}

std::string verify_admissible(const AdmissibleStructure& s, double tol) {
  const std::size_t n = s.K.rows();
  std::ostringstream oss;
  if (!s.K.square() || s.Q.rows() != n || s.Q.cols() != n || s.U.rows() != n ||
      s.U.cols() != n)
    return "shape mismatch among K, Q, U";
  if (s.ell == 0 || s.ell > n) return "ell out of range";
  const double orth = (s.Q.transpose() * s.Q - Matrix::identity(n)).max_abs();
  if (orth > tol) {
    oss << "Q not orthogonal (|Q^T Q - Id| = " << orth << ")";
    return oss.str();
  }
  const double recon = (s.K - s.Q * s.U * s.Q.transpose()).max_abs();
  if (recon > tol * std::max(1.0, s.K.max_abs())) {
    oss << "K != Q U Q^T (residual " << recon << ")";
    return oss.str();
  }
  for (std::size_t i = 0; i < s.ell; ++i)
    for (std::size_t j = 0; j < s.ell; ++j)
      if (std::abs(s.U(i, j) - (i == j ? 1.0 : 0.0)) > tol) return "U_II differs from Id";
  for (std::size_t i = s.ell; i < n; ++i)
    for (std::size_t j = 0; j < s.ell; ++j)
      if (std::abs(s.U(i, j)) > tol) return "U_JI differs from 0";
  if (s.ell < n) {
    const Matrix Ujj = s.U.block(s.ell, s.ell, n - s.ell, n - s.ell);
    const double r = spectral_radius_gelfand(Ujj);
    if (!(r < 1.0 - tol)) {
      oss << "spectral radius of U_JJ not strictly below 1 (" << r << ")";
      return oss.str();
    }
  }
  if (s.lambda_plus < 0.0) return "lambda_plus must be nonnegative";
  return {};
}

}  // namespace hawkvol
