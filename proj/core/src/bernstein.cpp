#include "hawkvol/bernstein.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "hawkvol/errors.hpp"
#include "hawkvol/quadrature.hpp"

namespace hawkvol {

std::string LevyMeasure::validate(std::size_t d) const {
  for (const auto& [t, w] : atoms) {
    if (!(t > 0.0)) return "levy measure: atoms must sit at t > 0";
    if (w.rows() != d || w.cols() != d || !w.nonnegative() || !w.all_finite())
      return "levy measure: atom weights must be nonnegative d x d";
  }
  for (const Cell& c : cells) {
    if (!(c.hi > c.lo) || c.lo < 0.0) return "levy measure: bad cell bounds";
    if (c.mass.rows() != d || c.mass.cols() != d || !c.mass.nonnegative() || !c.mass.all_finite())
      return "levy measure: cell masses must be nonnegative d x d";
  }
  if (!one_wedge_t(d).all_finite()) return "levy measure: (1 ^ t) integral diverges";
  return {};
}

Matrix LevyMeasure::one_wedge_t(std::size_t d) const {
  Matrix acc(d, d);
  for (const auto& [t, w] : atoms) acc += std::min(1.0, t) * w;
  for (const Cell& c : cells) acc += std::min(1.0, 0.5 * (c.lo + c.hi)) * c.mass;
  return acc;
}

Matrix LevyMeasure::total(std::size_t d) const {
  Matrix acc(d, d);
  for (const auto& [t, w] : atoms) acc += w;
  for (const Cell& c : cells) acc += c.mass;
  return acc;
}

EbfMatrix EbfMatrix::from_triplet(Matrix b, Matrix sigma, LevyMeasure nu) {
  EbfMatrix f;
  f.kind_ = Kind::triplet;
  f.d_ = b.rows();
  f.b_ = std::move(b);
  f.sigma_ = std::move(sigma);
  f.nu_ = std::move(nu);
  const std::string err = f.validate();
  if (!err.empty()) throw std::invalid_argument("EbfMatrix: " + err);
  return f;
}

EbfMatrix EbfMatrix::shifted_power(Matrix drift, Matrix c_diag, double alpha, double beta) {
  EbfMatrix f;
  f.kind_ = Kind::shifted_power;
  f.d_ = drift.rows();
  f.b_ = std::move(drift);
  f.c_ = std::move(c_diag);
  f.alpha_ = alpha;
  f.beta_ = beta;
  f.sigma_ = Matrix(f.d_, f.d_);
  const std::string err = f.validate();
  if (!err.empty()) throw std::invalid_argument("EbfMatrix: " + err);
  return f;
}

EbfMatrix EbfMatrix::scalar_triplet(double b, double sigma, LevyMeasure nu) {
  Matrix bm(1, 1), sm(1, 1);
  bm(0, 0) = b;
  sm(0, 0) = sigma;
  return from_triplet(bm, sm, std::move(nu));
}

EbfMatrix EbfMatrix::scalar_power(double drift, double c, double alpha, double beta) {
  Matrix bm(1, 1), cm(1, 1);
  bm(0, 0) = drift;
  cm(0, 0) = c;
  return shifted_power(bm, cm, alpha, beta);
}

std::string EbfMatrix::validate() const {
  if (d_ == 0 || !b_.square() || b_.rows() != d_) return "bad drift matrix";
  if (!b_.all_finite()) return "drift must be finite";
  if (kind_ == Kind::triplet) {
    if (!sigma_.square() || sigma_.rows() != d_) return "bad sigma matrix";
    if (!sigma_.nonnegative() || !sigma_.all_finite()) return "sigma must be nonnegative";
    return nu_.validate(d_);
  }
  if (!c_.square() || c_.rows() != d_) return "bad c matrix";
  for (std::size_t i = 0; i < d_; ++i)
    for (std::size_t j = 0; j < d_; ++j) {
      if (i != j && c_(i, j) != 0.0) return "c must be diagonal";
      if (i == j && !(c_(i, i) > 0.0)) return "c must have positive diagonal";
    }
  if (!(alpha_ > 0.0) || alpha_ > 1.0) return "alpha must be in (0, 1]";
  if (beta_ < 0.0) return "beta must be >= 0";
  return {};
}

Matrix EbfMatrix::eval(double lambda) const {
  if (lambda < 0.0) throw std::invalid_argument("EbfMatrix::eval: lambda must be >= 0");
  if (kind_ == Kind::shifted_power) {
    Matrix out = b_;
    const double p = std::pow(lambda + beta_, alpha_) - std::pow(beta_, alpha_);
    for (std::size_t i = 0; i < d_; ++i) out(i, i) += c_(i, i) * p;
    return out;
  }
  Matrix out = b_ + lambda * sigma_;
  for (const auto& [t, w] : nu_.atoms) out += (1.0 - std::exp(-lambda * t)) * w;
  for (const LevyMeasure::Cell& c : nu_.cells) {
    const double mid = 0.5 * (c.lo + c.hi);  // midpoint rule per cell
    out += (1.0 - std::exp(-lambda * mid)) * c.mass;
  }
  return out;
}

Matrix EbfMatrix::drift() const { return b_; }

Matrix reduced_varphi(const AdmissibleStructure& s, const EbfMatrix& F, double lambda) {
  const std::size_t d = s.dim(), ell = s.ell;
  const Matrix M = s.Q.transpose() * F.eval(lambda) * s.Q;
  const Matrix Mii = M.block(0, 0, ell, ell);
  if (ell == d) return Mii;
  const Matrix Uij = s.U.block(0, ell, ell, d - ell);
  const Matrix Ujj = s.U.block(ell, ell, d - ell, d - ell);
  const Matrix Mji = M.block(ell, 0, d - ell, ell);
  const Matrix core = lu_solve(Matrix::identity(d - ell) - Ujj, Mji);
  return Mii + Uij * core;
}

AdmissibilityReport is_admissible(const AdmissibleStructure& s, const EbfMatrix& F,
                                  double lambda_max, std::size_t n_scan, double det_floor) {
  if (!(lambda_max > s.lambda_plus))
    throw std::invalid_argument("is_admissible: lambda_max must exceed lambda_plus");
  AdmissibilityReport rep;
  rep.admissible = true;
  rep.min_abs_det = 1e300;
  double prev_det = 0.0;
  for (std::size_t i = 0; i <= n_scan; ++i) {
    const double lam =
        s.lambda_plus + (lambda_max - s.lambda_plus) * static_cast<double>(i) / n_scan;
    const Matrix vphi = reduced_varphi(s, F, lam);
    const double scale = std::max(1.0, std::pow(vphi.max_abs(), static_cast<double>(s.ell)));
    const double det = lu_determinant(vphi);
    rep.min_abs_det = std::min(rep.min_abs_det, std::abs(det));
    if (std::abs(det) < det_floor * scale) {
      rep.admissible = false;
      rep.near_singular_lambdas.push_back(lam);
    } else if (i > 0 && prev_det * det < 0.0) {
      // continuous determinant changed sign: a root sits between scan points
      rep.admissible = false;
      rep.near_singular_lambdas.push_back(
          lam - 0.5 * (lambda_max - s.lambda_plus) / n_scan);
      rep.min_abs_det = 0.0;
    }
    prev_det = det;
  }
  return rep;
}

Matrix potential_laplace(const AdmissibleStructure& s, const EbfMatrix& F, double lambda) {
  if (lambda < s.lambda_plus)
    throw std::invalid_argument("potential_laplace: lambda below lambda_plus");
  const std::size_t d = s.dim(), ell = s.ell;
  const Matrix vphi = reduced_varphi(s, F, lambda);
  const Matrix vphi_inv = lu_inverse(vphi);
  Matrix inner(d, d);
  inner.set_block(0, 0, vphi_inv);
  if (ell < d) {
    const Matrix Uij = s.U.block(0, ell, ell, d - ell);
    const Matrix Ujj = s.U.block(ell, ell, d - ell, d - ell);
    inner.set_block(0, ell, vphi_inv * Uij * lu_inverse(Matrix::identity(d - ell) - Ujj));
  }
  return s.Q * inner * s.Q.transpose();
}

GridMeasure potential_measure_closed_form(const EbfMatrix& F, double delta, double horizon) {
  if (F.kind() != EbfMatrix::Kind::shifted_power)
    throw std::invalid_argument("potential_measure_closed_form: unsupported family");
  const std::size_t d = F.dim();
  const std::size_t K = grid_steps(delta, horizon);
  const double alpha = F.alpha(), beta = F.beta();

  GridMeasure out;
  out.delta = delta;
  out.atom0 = Matrix(d, d);
  out.cells.assign(K, Matrix(d, d));
  const double norm = std::exp(-std::lgamma(alpha));
  for (std::size_t k = 0; k < K; ++k) {
    const double t0 = delta * static_cast<double>(k), t1 = t0 + delta;
    const double m = norm * power_exp_mass(alpha, beta, t0, t1);
    for (std::size_t i = 0; i < d; ++i) out.cells[k](i, i) = m / F.c_diag()(i, i);
  }
  return out;
}

PotentialInversion potential_inversion_gs(const AdmissibleStructure& s, const EbfMatrix& F,
                                          double delta, double horizon, int gs_order) {
  const std::size_t d = s.dim();
  const std::size_t K = grid_steps(delta, horizon);
  const auto w = gaver_stehfest_weights(gs_order);
  const double ln2 = std::log(2.0);

  // atom at zero from the high-lambda limit of the transform; the two-point
  // extrapolation removes the O(1/lambda_big) bleed of any density part
  const double lambda_big = 1e6 / horizon;
  Matrix atom = 2.0 * potential_laplace(s, F, 2.0 * lambda_big) -
                potential_laplace(s, F, lambda_big);
  const double scale = std::max(1.0, atom.max_abs());
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) {
      if (i == j) continue;
      if (std::abs(atom(i, j)) > 1e-8 * scale)
        throw NumericalError(
            "potential_inversion_gs: atom at zero is not diagonal (unsupported input)");
      atom(i, j) = 0.0;
    }
  for (std::size_t i = 0; i < d; ++i) atom(i, i) = std::max(atom(i, i), 0.0);

  // continuous part of the distribution function by Gaver-Stehfest
  auto cont_at = [&](double t) {
    Matrix acc(d, d);
    for (std::size_t m = 1; m < w.size(); ++m) {
      const double lam = static_cast<double>(m) * ln2 / t;
      acc += (w[m] / lam) * (potential_laplace(s, F, lam) - atom);
    }
    return (ln2 / t) * acc;
  };

  PotentialInversion out;
  out.measure.delta = delta;
  out.measure.atom0 = atom;
  out.measure.cells.assign(K, Matrix(d, d));
  Matrix prev(d, d);
  double clipped = 0.0, total = 0.0;
  for (std::size_t k = 1; k <= K; ++k) {
    const Matrix cur = cont_at(delta * static_cast<double>(k));
    Matrix cell = cur - prev;
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j) {
        if (cell(i, j) < 0.0) {
          clipped += -cell(i, j);
          cell(i, j) = 0.0;
        }
        total += cell(i, j);
      }
    out.measure.cells[k - 1] = cell;
    prev = out.measure.cumulative(k) - atom;  // isotonic: continue from the repaired value
  }
  out.monotonicity_repair = clipped;
  const double mass_scale = total + atom.max_abs();
  if (clipped > 1e-3 * std::max(mass_scale, 1e-30))
    throw NumericalError("potential_inversion_gs: oscillatory inversion (non-monotone target)");
  return out;
}

GridMeasure potential_from_resolvent_eq(const GridMeasure& Pi0, const Matrix& bPhi) {
  const std::size_t d = Pi0.dim();
  if (bPhi.rows() != d || bPhi.cols() != d)
    throw std::invalid_argument("potential_from_resolvent_eq: shape mismatch");
  const std::size_t K = Pi0.n_cells();

  const Matrix A0 = Pi0.atom0;
  const Matrix coupling = Matrix::identity(d) + A0 * bPhi;
  GridMeasure Pi;
  Pi.delta = Pi0.delta;
  Pi.cells.assign(K, Matrix(d, d));
  Matrix rhs0 = A0;
  Pi.atom0 = lu_solve(coupling, rhs0);

  // cells as point masses at their right edges: products land on the grid
  for (std::size_t k = 1; k <= K; ++k) {
    Matrix rhs = Pi0.cells[k - 1];
    // - sum_{i=1}^{k-1} P_i b X_{k-i}  - P_k b X_0
    for (std::size_t i = 1; i < k; ++i) rhs -= Pi0.cells[i - 1] * bPhi * Pi.cells[k - i - 1];
    rhs -= Pi0.cells[k - 1] * bPhi * Pi.atom0;
    Pi.cells[k - 1] = lu_solve(coupling, rhs);
  }
  return Pi;
}

std::pair<double, double> resolvent_eq_residual(const GridMeasure& Pi0, const GridMeasure& Pi,
                                                const Matrix& bPhi) {
  const std::size_t d = Pi0.dim();
  const std::size_t K = std::min(Pi0.n_cells(), Pi.n_cells());
  auto conv_cell = [&](const GridMeasure& A, const GridMeasure& B, std::size_t k) {
    // cell k of A * (bPhi . B) under the right-edge point-mass convention
    Matrix acc = A.atom0 * bPhi * B.cells[k - 1];
    acc += A.cells[k - 1] * bPhi * B.atom0;
    for (std::size_t i = 1; i < k; ++i) acc += A.cells[i - 1] * bPhi * B.cells[k - i - 1];
    return acc;
  };
  double r1 = (Pi0.atom0 - Pi.atom0 - Pi0.atom0 * bPhi * Pi.atom0).max_abs();
  double r2 = (Pi0.atom0 - Pi.atom0 - Pi.atom0 * bPhi * Pi0.atom0).max_abs();
  for (std::size_t k = 1; k <= K; ++k) {
    r1 = std::max(r1,
                  (Pi0.cells[k - 1] - Pi.cells[k - 1] - conv_cell(Pi0, Pi, k)).max_abs());
    r2 = std::max(r2,
                  (Pi0.cells[k - 1] - Pi.cells[k - 1] - conv_cell(Pi, Pi0, k)).max_abs());
  }
  return {r1, r2};
}

CriticalityReport classify_criticality(double drift_scalar) {
  CriticalityReport rep;
  rep.heuristic = false;
  if (drift_scalar > 0.0) rep.label = Criticality::subcritical;
  else if (drift_scalar < 0.0) rep.label = Criticality::supercritical;
  else rep.label = Criticality::critical;
  return rep;
}

CriticalityReport classify_criticality(const GridMeasure& Pi, double lambda_pi_estimate) {
  CriticalityReport rep;
  rep.heuristic = true;
  const std::size_t K = Pi.n_cells();
  if (K < 4) throw std::invalid_argument("classify_criticality: too few cells");
  Matrix first(Pi.dim(), Pi.dim()), second(Pi.dim(), Pi.dim());
  for (std::size_t k = 0; k < K / 2; ++k) first += Pi.cells[k];
  for (std::size_t k = K / 2; k < 2 * (K / 2); ++k) second += Pi.cells[k];
  const double head = first.max_abs() + Pi.atom0.max_abs();
  rep.growth_ratio = (head > 0.0) ? second.max_abs() / head : 0.0;
  if (lambda_pi_estimate > 0.0 || rep.growth_ratio > 1.2) rep.label = Criticality::supercritical;
  else if (rep.growth_ratio < 0.5) rep.label = Criticality::subcritical;
  else rep.label = Criticality::critical;
  return rep;
}

const char* to_string(Criticality c) {
  switch (c) {
    case Criticality::subcritical: return "subcritical";
    case Criticality::critical: return "critical";
    case Criticality::supercritical: return "supercritical";
  }
  return "unknown";
}

std::pair<Kernel, ScalingScheme> build_prelimit_kernels(const EbfMatrix& f, const Matrix& A,
                                                        std::size_t n) {
  if (f.kind() != EbfMatrix::Kind::triplet)
    throw std::invalid_argument("build_prelimit_kernels: triplet-backed function required");
  const std::size_t d = f.dim();
  if (A.rows() != d || A.cols() != d || !A.nonnegative())
    throw std::invalid_argument("build_prelimit_kernels: A must be nonnegative d x d");
  if (n < 2) throw std::invalid_argument("build_prelimit_kernels: n must be >= 2");
  const double nn = static_cast<double>(n);

  Kernel phi(d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) {
      // scalar construction for the normalized target f_ij / A_ij
      const double aij = A(i, j);
      double drift = f.drift()(i, j);
      double sigma = f.sigma()(i, j);
      double nu_tot = 0.0;
      std::vector<LevyMeasure::Cell> pieces;
      for (const auto& [t, wgt] : f.nu().atoms) {
        if (wgt(i, j) == 0.0) continue;
        const double wd = std::min(t, 1.0) / nn;  // atoms smeared over a shrinking cell
        LevyMeasure::Cell c;
        c.lo = t - wd;
        c.hi = t;
        c.mass = Matrix(1, 1);
        c.mass(0, 0) = wgt(i, j);
        pieces.push_back(c);
        nu_tot += wgt(i, j);
      }
      for (const LevyMeasure::Cell& c : f.nu().cells) {
        if (c.mass(i, j) == 0.0) continue;
        LevyMeasure::Cell p = c;
        p.mass = Matrix(1, 1);
        p.mass(0, 0) = c.mass(i, j);
        pieces.push_back(p);
        nu_tot += c.mass(i, j);
      }
      if (aij == 0.0) {
        if (drift != 0.0 || sigma != 0.0 || nu_tot != 0.0)
          throw std::invalid_argument(
              "build_prelimit_kernels: nonzero target entry over a zero entry of A");
        continue;
      }
      drift /= aij;
      sigma /= aij;
      nu_tot /= aij;
      if (drift >= nn)
        throw NumericalError("build_prelimit_kernels: n too small for the drift entry");

      const double eps_n = std::min(nu_tot / nn, 1.0);
      const double beta_n = (sigma > 0.0) ? 1.0 / sigma : nn;
      const double head = aij * (1.0 - drift / nn);
      KernelEntry& entry = phi.at(i, j);
      if (head * (1.0 - eps_n) > 0.0)
        entry.terms.push_back(
            KernelTerm::exponential(head * (1.0 - eps_n) * beta_n, beta_n));
      if (eps_n > 0.0 && nu_tot > 0.0) {
        // tail-density component: cell (lo, hi] of nu maps to (n lo, n hi]
        // with total histogram mass eps_n * head * (cell mass / nu_tot)
        std::vector<double> edges;
        std::vector<double> levels;
        std::sort(pieces.begin(), pieces.end(),
                  [](const LevyMeasure::Cell& a, const LevyMeasure::Cell& b) { return a.lo < b.lo; });
        for (const LevyMeasure::Cell& c : pieces) {
          const double lo = nn * c.lo, hi = nn * c.hi;
          const double mass = eps_n * head * (c.mass(0, 0) / aij) / nu_tot;
          if (!edges.empty() && lo < edges.back())
            throw std::invalid_argument("build_prelimit_kernels: overlapping nu cells");
          if (!edges.empty() && lo > edges.back()) {
            edges.push_back(lo);
            levels.push_back(0.0);
          }
          if (edges.empty()) edges.push_back(lo);
          edges.push_back(hi);
          levels.push_back(mass / (hi - lo));
        }
        entry.terms.push_back(KernelTerm::histogram(std::move(edges), std::move(levels)));
      }
    }
  return {phi, ScalingScheme{n, nn}};
}

Grid<Vec> upsilon_from_gamma(const GridMeasure& Pi, const Grid<Vec>& Gamma) {
  if (Gamma.delta != Pi.delta || Gamma.steps() < Pi.n_cells())
    throw std::invalid_argument("upsilon_from_gamma: Gamma does not cover the measure grid");
  const std::size_t d = Pi.dim();
  const std::size_t K = Pi.n_cells();
  Grid<Vec> ups(Pi.delta, K, Vec(d, 0.0));
  for (std::size_t k = 0; k <= K; ++k) {
    Vec acc(d, 0.0);
    auto add = [&](const Matrix& m, const Vec& g) {
      for (std::size_t r = 0; r < d; ++r)
        for (std::size_t c = 0; c < d; ++c) acc[r] += m(r, c) * g[c];
    };
    add(Pi.atom0, Gamma[k]);
    for (std::size_t i = 1; i <= k; ++i) add(Pi.cells[i - 1], Gamma[k - i]);
    ups[k] = acc;
  }
  return ups;
}

}  // namespace hawkvol
