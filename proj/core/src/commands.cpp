#include "hawkvol/commands.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <vector>

#include "hawkvol/bernstein.hpp"
#include "hawkvol/errors.hpp"
#include "hawkvol/hawkes.hpp"
#include "hawkvol/kernels.hpp"
#include "hawkvol/matlin.hpp"
#include "hawkvol/quadrature.hpp"
#include "hawkvol/riccati.hpp"
#include "hawkvol/rng.hpp"
#include "hawkvol/sve.hpp"

namespace hawkvol {

namespace {

// CSV with a fixed column order and 17 significant digits, so reruns with the
// same (config, seed) are byte-identical.
class Csv {
 public:
  Csv(const std::string& dir, const std::string& name) {
    std::filesystem::create_directories(dir);
    path_ = dir + "/" + name;
    out_.open(path_);
    if (!out_) throw NumericalError("cannot open output file " + path_);
  }

  void header(const std::vector<std::string>& cols) {
    for (std::size_t i = 0; i < cols.size(); ++i) out_ << (i ? "," : "") << cols[i];
    out_ << "\n";
  }

  Csv& field(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out_ << (first_ ? "" : ",") << buf;
    first_ = false;
    return *this;
  }

  Csv& field(const std::string& s) {
    out_ << (first_ ? "" : ",") << s;
    first_ = false;
    return *this;
  }

  void endrow() {
    out_ << "\n";
    first_ = true;
  }

  const std::string& path() const { return path_; }

 private:
  std::string path_;
  std::ofstream out_;
  bool first_ = true;
};

RunOptions merged(const ExperimentConfig& cfg, const RunOptions& opts) {
  RunOptions m = opts;
  if (m.out_dir.empty()) m.out_dir = cfg.output_dir;
  if (!m.seed) m.seed = cfg.mc.seed;
  if (!m.threads) m.threads = cfg.mc.threads;
  return m;
}

const Kernel& require_kernel(const ExperimentConfig& cfg) {
  if (!cfg.kernel) throw ConfigError("kernel: required by this command");
  return *cfg.kernel;
}

const ExogenousInput& require_exogenous(const ExperimentConfig& cfg) {
  if (!cfg.exogenous) throw ConfigError("exogenous: required by this command");
  return *cfg.exogenous;
}

void write_riccati_csv(const std::string& dir, const std::string& name,
                       const RiccatiSolution& sol) {
  Csv csv(dir, name);
  const std::size_t d = sol.V[0].size();
  std::vector<std::string> cols{"t"};
  for (std::size_t i = 0; i < d; ++i) {
    const std::string si = std::to_string(i);
    cols.push_back("re_V_" + si);
    cols.push_back("im_V_" + si);
    cols.push_back("re_W_" + si);
    cols.push_back("im_W_" + si);
  }
  csv.header(cols);
  for (std::size_t k = 0; k <= sol.V.steps(); ++k) {
    csv.field(sol.V.delta * static_cast<double>(k));
    for (std::size_t i = 0; i < d; ++i)
      csv.field(sol.V[k][i].real())
          .field(sol.V[k][i].imag())
          .field(sol.W[k][i].real())
          .field(sol.W[k][i].imag());
    csv.endrow();
  }
}

}  // namespace

void cmd_resolvent(const ExperimentConfig& cfg, const RunOptions& raw_opts) {
  const RunOptions opts = merged(cfg, raw_opts);
  const Kernel& phi = require_kernel(cfg);
  const double delta = cfg.grid.delta, T = cfg.grid.horizon;

  const Matrix mass = l1_norm(phi);
  const double rho = spectral_radius(mass, 1e-10);
  if (rho > 0.999)
    std::cerr << "warning: kernel mean offspring matrix has spectral radius " << rho
              << " (near critical)\n";

  const Grid<Matrix> R = resolvent_grid(phi, delta, T);
  Csv csv(opts.out_dir, "resolvent.csv");
  std::vector<std::string> cols{"t"};
  for (std::size_t i = 0; i < phi.d; ++i)
    for (std::size_t j = 0; j < phi.d; ++j)
      cols.push_back("R_" + std::to_string(i) + "_" + std::to_string(j));
  for (std::size_t i = 0; i < phi.d; ++i)
    for (std::size_t j = 0; j < phi.d; ++j)
      cols.push_back("IR_" + std::to_string(i) + "_" + std::to_string(j));
  csv.header(cols);
  Matrix acc(phi.d, phi.d);
  for (std::size_t k = 0; k <= R.steps(); ++k) {
    csv.field(delta * static_cast<double>(k));
    for (std::size_t i = 0; i < phi.d; ++i)
      for (std::size_t j = 0; j < phi.d; ++j) csv.field(R[k](i, j));
    for (std::size_t i = 0; i < phi.d; ++i)
      for (std::size_t j = 0; j < phi.d; ++j) csv.field(acc(i, j));
    csv.endrow();
    if (k < R.steps()) acc += delta * R[k];  // left-rectangle cumulative
  }

  Csv summary(opts.out_dir, "resolvent_summary.csv");
  summary.header({"lambda", "laplace_identity_residual"});
  std::vector<double> lambdas = cfg.laplace_lambdas;
  if (lambdas.empty()) lambdas = {1.0};
  for (double lam : lambdas) {
    summary.field(lam).field(laplace_identity_check(phi, R, lam));
    summary.endrow();
  }
}

void cmd_fl_verify(const ExperimentConfig& cfg, const RunOptions& raw_opts) {
  const RunOptions opts = merged(cfg, raw_opts);
  const Kernel& phi = require_kernel(cfg);
  const ExogenousInput& mu = require_exogenous(cfg);
  if (cfg.test_functions.empty())
    throw ConfigError("test_functions: at least one entry required for fl-verify");

  Csv csv(opts.out_dir, "fl_verify.csv");
  csv.header({"index", "T", "mc_mean_re", "mc_mean_im", "mc_se", "riccati_re", "riccati_im",
              "z_score"});
  const double delta = cfg.grid.delta;
  for (std::size_t idx = 0; idx < cfg.test_functions.size(); ++idx) {
    const TestFunctionSpec& spec = cfg.test_functions[idx];
    if (spec.f.size() != phi.d)
      throw ConfigError("test_functions[" + std::to_string(idx) + "]: dimension must match kernel");
    const std::size_t steps = grid_steps(delta, spec.T);
    const TestFunctions tf = spec.sample(delta, steps);

    const Grid<Matrix> R = resolvent_grid(phi, delta, spec.T);
    const RiccatiSolution sol = solve_prelimit(R, tf);
    if (idx == 0) write_riccati_csv(opts.out_dir, "riccati_prelimit.csv", sol);
    const Grid<Vec> H = baseline_H(phi, mu, delta, spec.T);
    const Cx analytic = fourier_laplace_hawkes(sol, H, spec.T);

    const McEstimate mc =
        mc_fourier_laplace(phi, mu, tf, spec.T, cfg.mc.paths, *opts.seed + idx, *opts.threads);
    const double z = (mc.std_err > 0.0) ? std::abs(mc.mean - analytic) / mc.std_err : 0.0;
    csv.field(static_cast<double>(idx))
        .field(spec.T)
        .field(mc.mean.real())
        .field(mc.mean.imag())
        .field(mc.std_err)
        .field(analytic.real())
        .field(analytic.imag())
        .field(z);
    csv.endrow();
  }

  // event-log export for the first configured functional, same per-path seeds
  // as the estimator above
  if (cfg.mc.event_log_paths > 0) {
    Csv events(opts.out_dir, "events.csv");
    events.header({"path_id", "component", "time"});
    const double T = cfg.test_functions.front().T;
    for (std::size_t p = 0; p < cfg.mc.event_log_paths; ++p) {
      const HawkesPath path = simulate(phi, mu, T, path_seed(*opts.seed, p));
      for (std::size_t comp = 0; comp < path.events.size(); ++comp)
        for (double tau : path.events[comp]) {
          events.field(static_cast<double>(p)).field(static_cast<double>(comp)).field(tau);
          events.endrow();
        }
    }
  }
}

namespace {

struct AffineLimitSide {
  GridMeasure Pi;
  Grid<Vec> Upsilon;
  std::pair<double, double> residuals;
};

// limit objects of the scalar affine family Phi = b + c lambda with constant
// exogenous coefficient a
AffineLimitSide affine_limit_side(const ScalingFamily& fam, double delta, double T) {
  AffineLimitSide side;
  const GridMeasure Pi0 =
      potential_measure_closed_form(EbfMatrix::scalar_power(0.0, fam.c, 1.0), delta, T);
  Matrix drift(1, 1);
  drift(0, 0) = fam.b;
  side.Pi = potential_from_resolvent_eq(Pi0, drift);
  side.residuals = resolvent_eq_residual(Pi0, side.Pi, drift);
  Grid<Vec> gamma(delta, Pi0.n_cells(), Vec{0.0});
  for (std::size_t k = 0; k <= gamma.steps(); ++k)
    gamma[k][0] = fam.a * delta * static_cast<double>(k);
  side.Upsilon = upsilon_from_gamma(side.Pi, gamma);
  return side;
}

}  // namespace

void cmd_scaling_study(const ExperimentConfig& cfg, const RunOptions& raw_opts) {
  const RunOptions opts = merged(cfg, raw_opts);
  if (!cfg.scaling) throw ConfigError("scaling: required for scaling-study");
  if (cfg.test_functions.empty())
    throw ConfigError("test_functions: at least one entry required for scaling-study");
  const ScalingSpec& spec = *cfg.scaling;
  const ScalingFamily& fam = spec.family;
  const double delta = cfg.grid.delta, T = spec.T;

  // admissibility of the target pair before any numerics
  const double lambda_plus = (fam.b < 0.0 ? -fam.b / fam.c : 0.0) + 0.01;
  const AdmissibleStructure st = build_admissible(Matrix::identity(1), 1e-8, lambda_plus);
  const EbfMatrix target = EbfMatrix::scalar_power(fam.b, fam.c, 1.0);
  const AdmissibilityReport rep = is_admissible(st, target, lambda_plus + 20.0);
  if (!rep.admissible)
    throw NumericalError("scaling-study: target function fails the admissibility scan");

  const std::size_t steps = grid_steps(delta, T);
  const TestFunctions tf = cfg.test_functions.front().sample(delta, steps);
  if (tf.dim() != 1) throw ConfigError("test_functions: scaling-study is scalar");

  const AffineLimitSide limit = affine_limit_side(fam, delta, T);
  const RiccatiSolution limit_sol = solve_limit(limit.Pi, tf);
  const Cx fl_limit = fourier_laplace_limit(limit_sol, limit.Upsilon, T);
  write_riccati_csv(opts.out_dir, "riccati_limit.csv", limit_sol);

  Csv csv(opts.out_dir, "scaling_study.csv");
  std::vector<std::string> cols{"n",          "theta_n",       "fl_rescaled_re",
                                "fl_rescaled_im", "fl_limit_re", "fl_limit_im",
                                "gap",        "sup_v_gap"};
  if (spec.mc_paths > 0) {
    cols.push_back("mc_re");
    cols.push_back("mc_im");
    cols.push_back("mc_se");
    cols.push_back("mc_z");
  }
  csv.header(cols);

  std::vector<double> gaps;
  for (const std::size_t n : spec.n_values) {
    const ScalingScheme scheme{n, static_cast<double>(n)};
    const double gamma = scheme.gamma();
    if (fam.b >= gamma)
      throw NumericalError("scaling-study: n too small for the drift of the family");
    const Kernel phi_n =
        Kernel::scalar(KernelTerm::exponential((1.0 - fam.b / gamma) / fam.c, 1.0 / fam.c));
    const GridMeasure cells = rescaled_resolvent_measure(phi_n, scheme, delta, T);

    Grid<Vec> Hn(delta, steps, Vec{0.0});
    Matrix acc(1, 1);
    for (std::size_t k = 0; k <= steps; ++k) {
      Hn[k][0] = fam.a / gamma + fam.a * acc(0, 0);
      if (k < steps) acc += cells.cells[k];
    }

    const RiccatiSolution sol = solve_rescaled(cells, tf, static_cast<double>(n) * scheme.theta_n);
    if (n == spec.n_values.back())
      write_riccati_csv(opts.out_dir, "riccati_rescaled.csv", sol);
    const Cx fl_n = fourier_laplace_hawkes(sol, Hn, T);
    gaps.push_back(std::abs(fl_n - fl_limit));
    double sup_v = 0.0;
    for (std::size_t k = 0; k <= steps; ++k)
      sup_v = std::max(sup_v, std::abs(sol.V[k][0] - limit_sol.V[k][0]));

    csv.field(static_cast<double>(n))
        .field(scheme.theta_n)
        .field(fl_n.real())
        .field(fl_n.imag())
        .field(fl_limit.real())
        .field(fl_limit.imag())
        .field(std::abs(fl_n - fl_limit))
        .field(sup_v);

    if (spec.mc_paths > 0) {
      // direct Monte Carlo of the rescaled functional on the prelimit process
      const ExogenousInput mu_n =
          ExogenousInput::constant({std::sqrt(scheme.theta_n / static_cast<double>(n)) * fam.a});
      const double big_T = static_cast<double>(n) * T;
      const double big_delta = static_cast<double>(n) * delta;
      Cx mean(0.0, 0.0);
      std::vector<Cx> vals(spec.mc_paths);
      for (std::size_t p = 0; p < spec.mc_paths; ++p) {
        const HawkesPath path = simulate(phi_n, mu_n, big_T, path_seed(*opts.seed, p));
        const Grid<Vec> lam_big = intensity_on_grid(phi_n, mu_n, path, big_delta, big_T);
        Cx accv(0.0, 0.0);
        for (std::size_t j = 1; j <= steps; ++j) {
          const double lam_res = lam_big[j][0] / scheme.theta_n;
          accv += (tf.f[steps - j][0] - gamma * tf.h[steps - j][0]) * lam_res * delta;
        }
        for (double tau : path.events[0]) {
          const double pos = (T - tau / static_cast<double>(n)) / delta;
          const auto kk = std::min<std::size_t>(
              static_cast<std::size_t>(std::llround(pos)), tf.h.steps());
          accv += tf.h[kk][0] / gamma;
        }
        vals[p] = std::exp(accv);
        mean += vals[p];
      }
      mean /= static_cast<double>(spec.mc_paths);
      double var = 0.0;
      for (const Cx& v : vals) {
        const Cx dv = v - mean;
        var += dv.real() * dv.real() + dv.imag() * dv.imag();
      }
      const double se =
          std::sqrt(var / std::max<std::size_t>(1, spec.mc_paths - 1) / spec.mc_paths);
      csv.field(mean.real()).field(mean.imag()).field(se).field(
          se > 0.0 ? std::abs(mean - fl_n) / se : 0.0);
    }
    csv.endrow();
  }

  Csv summary(opts.out_dir, "scaling_summary.csv");
  summary.header({"metric", "value"});
  bool monotone = true;
  for (std::size_t i = 1; i < gaps.size(); ++i) monotone = monotone && gaps[i] < gaps[i - 1];
  summary.field("gap_monotone_decreasing").field(monotone ? 1.0 : 0.0);
  summary.endrow();
  summary.field("resolvent_eq_residual_forward").field(limit.residuals.first);
  summary.endrow();
  summary.field("resolvent_eq_residual_reversed").field(limit.residuals.second);
  summary.endrow();
  summary.field("admissibility_min_abs_det").field(rep.min_abs_det);
  summary.endrow();
}

namespace {

GridMeasure sve_kernel_cells(const SveSpec& spec, double delta, double T) {
  const std::size_t d = spec.c_diag.size();
  GridMeasure m;
  m.delta = delta;
  m.atom0 = Matrix(d, d);
  const std::size_t K = grid_steps(delta, T);
  m.cells.assign(K, Matrix(d, d));
  for (std::size_t k = 0; k < K; ++k) {
    const double t0 = delta * static_cast<double>(k), t1 = t0 + delta;
    double mass;
    if (spec.kernel_type == "power")
      mass = power_exp_mass(spec.alpha, spec.beta, t0, t1) * std::exp(-std::lgamma(spec.alpha));
    else
      mass = spec.scale * (std::exp(-spec.rate * t0) - std::exp(-spec.rate * t1)) / spec.rate;
    for (std::size_t i = 0; i < d; ++i) m.cells[k](i, i) = mass / spec.c_diag[i];
  }
  return m;
}

LimitBaseline sve_baseline(const SveSpec& spec, double delta, double T) {
  const std::size_t d = spec.c_diag.size();
  const std::size_t K = grid_steps(delta, T);
  LimitBaseline base;
  base.upsilon = Grid<Vec>(delta, K, Vec(d, 0.0));
  base.upsilon_prime = Grid<Vec>(delta, K, Vec(d, 0.0));
  for (std::size_t k = 0; k <= K; ++k) {
    const double t = delta * static_cast<double>(k);
    for (std::size_t i = 0; i < d; ++i) {
      if (spec.upsilon_type == "linear") {
        base.upsilon[k][i] = spec.slope * t;
        base.upsilon_prime[k][i] = spec.slope;
      } else {  // cir: Upsilon' = a Pi-bar for Phi = b + c lambda
        const double b = spec.b_mat(i, i), c = spec.c_diag[i], a = spec.a[i];
        base.upsilon_prime[k][i] = a * (1.0 - std::exp(-b * t / c)) / b;
        base.upsilon[k][i] = a * (t - (c / b) * (1.0 - std::exp(-b * t / c))) / b;
      }
    }
  }
  base.gamma_prime = Grid<Vec>(delta, K, spec.gamma_prime);
  return base;
}

}  // namespace

void cmd_sve(const ExperimentConfig& cfg, const RunOptions& raw_opts) {
  const RunOptions opts = merged(cfg, raw_opts);
  if (!cfg.sve) throw ConfigError("sve: required for the sve command");
  const SveSpec& spec = *cfg.sve;
  const double delta = cfg.grid.delta, T = spec.T;
  const std::size_t K = grid_steps(delta, T);
  const std::size_t d = spec.c_diag.size();
  if (spec.a.size() != d || spec.b_mat.rows() != d)
    throw ConfigError("sve: a, b, c must agree in dimension");

  GridMeasure cells;
  LimitBaseline base = sve_baseline(spec, delta, T);
  if (spec.scheme != "rough_cir") cells = sve_kernel_cells(spec, delta, T);
  if (spec.scheme == "atom") {
    if (d != 1) throw ConfigError("sve: atom scheme is scalar");
    cells.atom0(0, 0) = spec.atom;
  }

  auto make_path = [&](std::size_t p) -> SvePath {
    const std::uint64_t s = path_seed(*opts.seed, p);
    if (spec.scheme == "density") return simulate_density_form(cells, base, T, s);
    if (spec.scheme == "rough_cir")
      return simulate_rough_cir(spec.alpha, spec.beta, spec.a, spec.b_mat,
                                [&] {
                                  Matrix c(d, d);
                                  for (std::size_t i = 0; i < d; ++i) c(i, i) = spec.c_diag[i];
                                  return c;
                                }(),
                                T, delta, s);
    if (spec.scheme == "atom") return simulate_atom_form(cells, base, T, s);
    return simulate_pi0_form(cells, spec.b_mat, base, T, s);
  };

  // reference mean of Xi for the audit
  Grid<Vec> ref(delta, K, Vec(d, 0.0));
  if (spec.scheme == "density" || spec.scheme == "atom") {
    for (std::size_t k = 0; k <= K; ++k) ref[k] = base.upsilon[k];
  } else {
    const Grid<Vec> gp = (spec.scheme == "rough_cir") ? Grid<Vec>(delta, K, spec.a)
                                                      : base.gamma_prime;
    GridMeasure kernel_cells =
        (spec.scheme == "rough_cir") ? sve_kernel_cells(spec, delta, T) : cells;
    const Grid<Vec> m = deterministic_mean_pi0(kernel_cells, spec.b_mat, gp, T);
    for (std::size_t k = 1; k <= K; ++k)
      for (std::size_t i = 0; i < d; ++i)
        ref[k][i] = ref[k - 1][i] + delta * m[k - 1][i];  // left rule, as in the schemes
  }

  Csv traj(opts.out_dir, "sve_trajectories.csv");
  std::vector<std::string> tcols{"path_id", "t"};
  for (std::size_t i = 0; i < d; ++i) tcols.push_back("Xi_" + std::to_string(i));
  for (std::size_t i = 0; i < d; ++i) tcols.push_back("M_" + std::to_string(i));
  for (std::size_t i = 0; i < d; ++i) tcols.push_back("xi_" + std::to_string(i));
  traj.header(tcols);

  std::vector<Vec> sum_xi(K + 1, Vec(d, 0.0)), sum_xi2(K + 1, Vec(d, 0.0));
  std::vector<Vec> sum_m(K + 1, Vec(d, 0.0)), sum_m2(K + 1, Vec(d, 0.0));
  double clip_sum = 0.0;
  for (std::size_t p = 0; p < spec.paths; ++p) {
    const SvePath path = make_path(p);
    clip_sum += path.clip_fraction;
    for (std::size_t k = 0; k <= K; ++k)
      for (std::size_t i = 0; i < d; ++i) {
        sum_xi[k][i] += path.Xi[k][i];
        sum_xi2[k][i] += path.Xi[k][i] * path.Xi[k][i];
        sum_m[k][i] += path.M[k][i];
        sum_m2[k][i] += path.M[k][i] * path.M[k][i];
      }
    if (p < spec.n_trajectories) {
      for (std::size_t k = 0; k <= K; ++k) {
        traj.field(static_cast<double>(p)).field(delta * static_cast<double>(k));
        for (std::size_t i = 0; i < d; ++i) traj.field(path.Xi[k][i]);
        for (std::size_t i = 0; i < d; ++i) traj.field(path.M[k][i]);
        for (std::size_t i = 0; i < d; ++i)
          traj.field(path.xi.values.empty() ? 0.0 : path.xi[k][i]);
        traj.endrow();
      }
    }
  }

  Csv summary(opts.out_dir, "sve_summary.csv");
  std::vector<std::string> scols{"t"};
  for (std::size_t i = 0; i < d; ++i) {
    const std::string si = std::to_string(i);
    scols.push_back("mean_Xi_" + si);
    scols.push_back("se_Xi_" + si);
    scols.push_back("ref_Xi_" + si);
    scols.push_back("mean_M_" + si);
    scols.push_back("var_M_" + si);
  }
  summary.header(scols);
  const double np = static_cast<double>(spec.paths);
  double worst_mean_z = 0.0, worst_qv_z = 0.0;
  for (std::size_t k = 0; k <= K; ++k) {
    summary.field(delta * static_cast<double>(k));
    for (std::size_t i = 0; i < d; ++i) {
      const double mean = sum_xi[k][i] / np;
      const double var = std::max(0.0, sum_xi2[k][i] / np - mean * mean);
      const double se = std::sqrt(var / np);
      const double mean_m = sum_m[k][i] / np;
      const double var_m = std::max(0.0, sum_m2[k][i] / np - mean_m * mean_m);
      summary.field(mean).field(se).field(ref[k][i]).field(mean_m).field(var_m);
      if ((k == K / 2 || k == K) && se > 0.0)
        worst_mean_z = std::max(worst_mean_z, std::abs(mean - ref[k][i]) / se);
      if (k == K && var > 0.0) {
        // Var(M(T)) should match E[Xi(T)] - Xi(0)
        const double qv_gap = std::abs(var_m - (mean - base.upsilon[0][i]));
        worst_qv_z = std::max(worst_qv_z, qv_gap / std::max(se, 1e-300));
      }
    }
    summary.endrow();
  }

  Csv audit(opts.out_dir, "sve_audit.csv");
  audit.header({"metric", "value"});
  audit.field("mean_clip_fraction").field(clip_sum / np);
  audit.endrow();
  audit.field("worst_mean_z_at_half_and_T").field(worst_mean_z);
  audit.endrow();
  audit.field("qv_gap_over_se_at_T").field(worst_qv_z);
  audit.endrow();
  if (clip_sum / np > 0.2)
    std::cerr << "warning: truncation frequency " << clip_sum / np
              << " exceeds 20% of steps; the run is flagged\n";
}

void cmd_potential(const ExperimentConfig& cfg, const RunOptions& raw_opts) {
  const RunOptions opts = merged(cfg, raw_opts);
  if (!cfg.potential) throw ConfigError("potential: required for the potential command");
  const PotentialSpec& spec = *cfg.potential;
  const double delta = cfg.grid.delta, T = cfg.grid.horizon;
  const std::size_t K = grid_steps(delta, T);

  const AdmissibleStructure st = build_admissible(Matrix::identity(1), 1e-8, spec.lambda_plus);
  const double drift = spec.ebf.drift()(0, 0);

  std::vector<std::pair<std::string, Grid<Matrix>>> dists;
  std::optional<std::pair<double, double>> residuals;

  for (const std::string& route : spec.routes) {
    if (route == "closed_form") {
      if (spec.ebf.kind() != EbfMatrix::Kind::shifted_power)
        throw NumericalError("potential: closed_form route needs the analytic family");
      dists.emplace_back("pibar_closed0",
                         potential_measure_closed_form(spec.ebf, delta, T).cumulative_grid());
    } else if (route == "gs") {
      dists.emplace_back(
          "pibar_gs",
          potential_inversion_gs(st, spec.ebf, delta, T, spec.gs_order).measure.cumulative_grid());
    } else {  // resolvent: Pi from Pi0 of the driftless part
      if (spec.ebf.kind() != EbfMatrix::Kind::shifted_power)
        throw NumericalError("potential: resolvent route needs the analytic family");
      const GridMeasure Pi0 = potential_measure_closed_form(spec.ebf, delta, T);
      Matrix bm(1, 1);
      bm(0, 0) = drift;
      const GridMeasure Pi = potential_from_resolvent_eq(Pi0, bm);
      residuals = resolvent_eq_residual(Pi0, Pi, bm);
      dists.emplace_back("pibar_resolvent", Pi.cumulative_grid());
    }
  }

  Csv csv(opts.out_dir, "potential.csv");
  std::vector<std::string> cols{"t"};
  for (const auto& [name, g] : dists) cols.push_back(name);
  csv.header(cols);
  for (std::size_t k = 0; k <= K; ++k) {
    csv.field(delta * static_cast<double>(k));
    for (const auto& [name, g] : dists) csv.field(g[k](0, 0));
    csv.endrow();
  }

  Csv summary(opts.out_dir, "potential_summary.csv");
  summary.header({"metric", "value"});
  summary.field("criticality").field(std::string(to_string(classify_criticality(drift).label)));
  summary.endrow();
  auto comparable = [&](const std::string& a, const std::string& b) {
    // gs and resolvent both compute Pi; closed_form computes the driftless
    // measure, comparable to the others only when the drift vanishes
    if (a == "pibar_closed0" || b == "pibar_closed0") return drift == 0.0;
    return true;
  };
  for (std::size_t i = 0; i < dists.size(); ++i)
    for (std::size_t j = i + 1; j < dists.size(); ++j) {
      if (!comparable(dists[i].first, dists[j].first)) continue;
      double full = 0.0, interior = 0.0;
      for (std::size_t k = 0; k <= K; ++k) {
        const double gap = std::abs(dists[i].second[k](0, 0) - dists[j].second[k](0, 0));
        full = std::max(full, gap);
        if (delta * static_cast<double>(k) >= 0.05 * T) interior = std::max(interior, gap);
      }
      summary.field("sup_gap_" + dists[i].first + "_vs_" + dists[j].first).field(full);
      summary.endrow();
      summary.field("interior_gap_" + dists[i].first + "_vs_" + dists[j].first).field(interior);
      summary.endrow();
    }
  if (residuals) {
    summary.field("resolvent_eq_residual_forward").field(residuals->first);
    summary.endrow();
    summary.field("resolvent_eq_residual_reversed").field(residuals->second);
    summary.endrow();
  }
}

bool run_command(const std::string& name, const ExperimentConfig& cfg, const RunOptions& opts) {
  if (name == "resolvent") cmd_resolvent(cfg, opts);
  else if (name == "fl-verify") cmd_fl_verify(cfg, opts);
  else if (name == "scaling-study") cmd_scaling_study(cfg, opts);
  else if (name == "sve") cmd_sve(cfg, opts);
  else if (name == "potential") cmd_potential(cfg, opts);
  else return false;
  return true;
}

}  // namespace hawkvol
