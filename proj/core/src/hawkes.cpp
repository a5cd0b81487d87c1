#include "hawkvol/hawkes.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <thread>

#include "hawkvol/errors.hpp"
#include "hawkvol/rng.hpp"

namespace hawkvol {

ExogenousInput ExogenousInput::constant(Vec mu) {
  ExogenousInput e;
  e.type = Type::constant;
  e.mu = std::move(mu);
  return e;
}

ExogenousInput ExogenousInput::sampled(Grid<Vec> rate) {
  ExogenousInput e;
  e.type = Type::sampled;
  e.rate = std::move(rate);
  return e;
}

ExogenousInput ExogenousInput::total_impact(Matrix A, std::size_t column) {
  ExogenousInput e;
  e.type = Type::total_impact;
  e.A = std::move(A);
  e.column = column;
  return e;
}

std::string ExogenousInput::validate(std::size_t d) const {
  switch (type) {
    case Type::constant:
      if (mu.size() != d) return "exogenous: mu dimension mismatch";
      for (double v : mu)
        if (v < 0.0 || !std::isfinite(v)) return "exogenous: mu must be finite and >= 0";
      return {};
    case Type::sampled:
      if (rate.values.empty() || rate.values.front().size() != d)
        return "exogenous: sampled rate dimension mismatch";
      for (const Vec& row : rate.values)
        for (double v : row)
          if (v < 0.0 || !std::isfinite(v)) return "exogenous: rate must be finite and >= 0";
      return {};
    case Type::total_impact:
      if (A.rows() != d || A.cols() != d) return "exogenous: A must be d x d";
      if (!A.nonnegative()) return "exogenous: A must be nonnegative";
      if (column >= d) return "exogenous: column out of range";
      return {};
  }
  return "exogenous: unknown type";
}

namespace {

Vec sampled_value(const Grid<Vec>& g, double t) {
  const double pos = t / g.delta;
  const auto k = std::min<std::size_t>(static_cast<std::size_t>(pos), g.steps());
  return g[k];  // piecewise-constant on cells
}

}  // namespace

Vec ExogenousInput::value(const Kernel& phi, double t) const {
  switch (type) {
    case Type::constant:
      return mu;
    case Type::sampled:
      return sampled_value(rate, t);
    case Type::total_impact: {
      Vec out(phi.d, 0.0);
      for (std::size_t i = 0; i < phi.d; ++i)
        for (std::size_t r = 0; r < phi.d; ++r)
          out[i] += A(i, r) * phi.at(r, column).value(t);
      return out;
    }
  }
  return {};
}

Vec ExogenousInput::sup_on(const Kernel& phi, double t0, double t1) const {
  switch (type) {
    case Type::constant:
      return mu;
    case Type::sampled: {
      Vec out(rate.values.front().size(), 0.0);
      const auto k0 = static_cast<std::size_t>(t0 / rate.delta);
      const auto k1 = std::min<std::size_t>(static_cast<std::size_t>(t1 / rate.delta) + 1,
                                            rate.steps());
      for (std::size_t k = k0; k <= k1; ++k)
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::max(out[i], rate[k][i]);
      return out;
    }
    case Type::total_impact: {
      Vec out(phi.d, 0.0);
      for (std::size_t i = 0; i < phi.d; ++i)
        for (std::size_t r = 0; r < phi.d; ++r)
          out[i] += A(i, r) * phi.at(r, column).sup_on(t0, t1);
      return out;
    }
  }
  return {};
}

Vec ExogenousInput::integral0(const Kernel& phi, double t) const {
  switch (type) {
    case Type::constant: {
      Vec out = mu;
      for (double& v : out) v *= t;
      return out;
    }
    case Type::sampled: {
      Vec out(rate.values.front().size(), 0.0);
      const std::size_t full = std::min<std::size_t>(static_cast<std::size_t>(t / rate.delta),
                                                     rate.steps());
      for (std::size_t k = 0; k < full; ++k)
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += rate[k][i] * rate.delta;
      const double rest = t - static_cast<double>(full) * rate.delta;
      if (rest > 0.0) {
        const Vec tail = rate[std::min(full, rate.steps())];
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += tail[i] * rest;
      }
      return out;
    }
    case Type::total_impact: {
      Vec out(phi.d, 0.0);
      for (std::size_t i = 0; i < phi.d; ++i)
        for (std::size_t r = 0; r < phi.d; ++r)
          out[i] += A(i, r) * phi.at(r, column).integral0(t);
      return out;
    }
  }
  return {};
}

std::size_t HawkesPath::total_events() const {
  std::size_t n = 0;
  for (const auto& comp : events) n += comp.size();
  return n;
}

namespace {

// Exponential kernel terms carry an exact decay state per (i, j, term);
// everything else is summed over the event history.
struct ExpState {
  std::size_t i, j;
  double a, b;
  double value = 0.0;
};

struct NonExpTerm {
  std::size_t i, j;
  const KernelTerm* term;
};

struct IntensityEngine {
  const Kernel& phi;
  const ExogenousInput& mu;
  std::vector<ExpState> exp_states;
  std::vector<NonExpTerm> other_terms;
  const std::vector<std::vector<double>>* events = nullptr;
  double t_state = 0.0;

  IntensityEngine(const Kernel& k, const ExogenousInput& m,
                  const std::vector<std::vector<double>>& ev)
      : phi(k), mu(m), events(&ev) {
    for (std::size_t i = 0; i < k.d; ++i)
      for (std::size_t j = 0; j < k.d; ++j)
        for (const KernelTerm& t : k.at(i, j).terms) {
          if (t.family == KernelTerm::Family::zero || t.a == 0.0) continue;
          if (t.family == KernelTerm::Family::exponential)
            exp_states.push_back({i, j, t.a, t.b, 0.0});
          else
            other_terms.push_back({i, j, &t});
        }
  }

  void advance(double t) {
    if (t <= t_state) return;
    const double dt = t - t_state;
    for (ExpState& s : exp_states) s.value *= std::exp(-s.b * dt);
    t_state = t;
  }

  void on_event(std::size_t comp, double t) {
    advance(t);
    for (ExpState& s : exp_states)
      if (s.j == comp) s.value += s.a;  // kernel value at lag zero
  }

  // excitation only (no exogenous part); assumes advance(t) was called and
  // all events are strictly before t
  Vec excitation(double t) const {
    Vec out(phi.d, 0.0);
    for (const ExpState& s : exp_states) out[s.i] += s.value;
    for (const NonExpTerm& nt : other_terms)
      for (double tau : (*events)[nt.j]) {
        if (tau >= t) break;
        out[nt.i] += nt.term->value(t - tau);
      }
    return out;
  }

  // upper bound for the excitation over [t0, t1] (valid state at t0)
  Vec excitation_bound(double t0, double t1, const ThinningOptions& opts) const {
    Vec out(phi.d, 0.0);
    for (const ExpState& s : exp_states) out[s.i] += s.value;  // decaying
    for (const NonExpTerm& nt : other_terms) {
      const bool singular = nt.term->singular_at_zero();
      for (double tau : (*events)[nt.j]) {
        if (tau >= t1) break;
        const double l0 = t0 - tau, l1 = t1 - tau;
        if (singular) {
          const double shifted = std::max(l0, opts.singular_shift);
          out[nt.i] += opts.singular_safety * nt.term->sup_on(shifted, std::max(l1, shifted));
        } else {
          out[nt.i] += nt.term->sup_on(std::max(l0, 0.0), l1);
        }
      }
    }
    return out;
  }
};

}  // namespace

HawkesPath simulate(const Kernel& phi, const ExogenousInput& mu, double T, std::uint64_t seed,
                    const ThinningOptions& opts, ThinningAudit* audit) {
  std::string err = phi.validate();
  if (err.empty()) err = mu.validate(phi.d);
  if (!err.empty()) throw std::invalid_argument("simulate: " + err);
  if (!(T > 0.0)) throw std::invalid_argument("simulate: T must be > 0");

  HawkesPath path;
  path.horizon = T;
  path.seed = seed;
  path.events.assign(phi.d, {});
  Rng rng(seed);
  IntensityEngine eng(phi, mu, path.events);
  ThinningAudit local;

  double t = 0.0;
  std::size_t count = 0;
  while (t < T) {
    const double window_end = std::min(T, t + opts.dom_refresh);
    eng.advance(t);
    const Vec exc = eng.excitation_bound(t, window_end, opts);
    const Vec exo = mu.sup_on(phi, t, window_end);
    double bound = 0.0;
    for (std::size_t i = 0; i < phi.d; ++i) bound += exc[i] + exo[i];
    if (!(bound > 0.0)) {
      t = window_end;
      continue;
    }
    double s = t;
    while (true) {
      s += rng.exponential(bound);
      if (s >= window_end) {
        t = window_end;
        break;
      }
      eng.advance(s);
      const Vec base = mu.value(phi, s);
      Vec lam = eng.excitation(s);
      double lam_tot = 0.0;
      for (std::size_t i = 0; i < phi.d; ++i) {
        lam[i] += base[i];
        lam_tot += lam[i];
      }
      local.proposals += 1;
      if (lam_tot > bound) local.bound_violations += 1;
      if (rng.uniform() * bound <= lam_tot) {
        double pick = rng.uniform() * lam_tot;
        std::size_t comp = 0;
        for (; comp + 1 < phi.d; ++comp) {
          if (pick < lam[comp]) break;
          pick -= lam[comp];
        }
        path.events[comp].push_back(s);
        eng.on_event(comp, s);
        local.accepted += 1;
        if (++count > opts.event_cap)
          throw NumericalError(
              "simulate: event cap exceeded (input likely supercritical or exploding)");
        t = s;
        break;  // refresh the bound after every event
      }
    }
  }
  if (audit) *audit = local;
  return path;
}

Vec intensity_at(const Kernel& phi, const ExogenousInput& mu,
                 const std::vector<std::vector<double>>& events, double t) {
  Vec out = mu.value(phi, t);
  for (std::size_t i = 0; i < phi.d; ++i)
    for (std::size_t j = 0; j < phi.d; ++j) {
      const KernelEntry& e = phi.at(i, j);
      if (e.zero()) continue;
      for (double tau : events[j]) {
        if (tau >= t) break;
        out[i] += e.value(t - tau);
      }
    }
  return out;
}

Grid<Vec> intensity_on_grid(const Kernel& phi, const ExogenousInput& mu,
                            const HawkesPath& path, double delta, double T) {
  const std::size_t K = grid_steps(delta, T);
  Grid<Vec> out(delta, K, Vec(phi.d, 0.0));
  IntensityEngine eng(phi, mu, path.events);

  // replay events in time order, advancing the exponential states
  std::vector<std::size_t> cursor(phi.d, 0);
  for (std::size_t k = 0; k <= K; ++k) {
    const double t = delta * static_cast<double>(k);
    while (true) {
      std::size_t next_comp = phi.d;
      double next_t = t;
      for (std::size_t j = 0; j < phi.d; ++j) {
        if (cursor[j] < path.events[j].size() && path.events[j][cursor[j]] < t &&
            (next_comp == phi.d || path.events[j][cursor[j]] < next_t)) {
          next_comp = j;
          next_t = path.events[j][cursor[j]];
        }
      }
      if (next_comp == phi.d) break;
      eng.on_event(next_comp, next_t);
      cursor[next_comp] += 1;
    }
    eng.advance(t);
    Vec lam = mu.value(phi, t);
    const Vec exc = eng.excitation(t);
    for (std::size_t i = 0; i < phi.d; ++i) lam[i] += exc[i];
    out[k] = lam;
  }
  return out;
}

Vec integrated_intensity(const Kernel& phi, const ExogenousInput& mu, const HawkesPath& path,
                         double t) {
  Vec out = mu.integral0(phi, t);
  for (std::size_t i = 0; i < phi.d; ++i)
    for (std::size_t j = 0; j < phi.d; ++j) {
      const KernelEntry& e = phi.at(i, j);
      if (e.zero()) continue;
      for (double tau : path.events[j]) {
        if (tau >= t) break;
        out[i] += e.integral0(t - tau);
      }
    }
  return out;
}

Grid<Vec> baseline_H(const Kernel& phi, const ExogenousInput& mu, double delta,
                     double horizon) {
  const std::string err = mu.validate(phi.d);
  if (!err.empty()) throw std::invalid_argument("baseline_H: " + err);
  const Grid<Matrix> R = resolvent_grid(phi, delta, horizon);
  const std::size_t K = R.steps();
  Grid<Vec> H(delta, K, Vec(phi.d, 0.0));
  std::vector<Vec> mu_vals(K + 1);
  for (std::size_t k = 0; k <= K; ++k)
    mu_vals[k] = mu.value(phi, delta * static_cast<double>(k));
  for (std::size_t k = 0; k <= K; ++k) {
    Vec acc = mu_vals[k];
    for (std::size_t j = 1; j <= k; ++j) {
      const Matrix& Rj = R[j];
      const Vec& m = mu_vals[k - j];
      for (std::size_t r = 0; r < phi.d; ++r)
        for (std::size_t c = 0; c < phi.d; ++c) acc[r] += delta * Rj(r, c) * m[c];
    }
    H[k] = acc;
  }
  return H;
}

Cx functional_sample(const Kernel& phi, const ExogenousInput& mu, const HawkesPath& path,
                     const TestFunctions& tf, double T) {
  const std::string err = tf.validate();
  if (!err.empty()) throw std::invalid_argument("functional_sample: " + err);
  const double delta = tf.f.delta;
  const std::size_t kT = grid_steps(delta, T);
  if (kT > tf.f.steps())
    throw std::invalid_argument("functional_sample: test functions shorter than T");

  const Grid<Vec> lam = intensity_on_grid(phi, mu, path, delta, T);
  // f * Lambda(T) - integral part of h * dN~(T), one grid pass
  Cx acc(0.0, 0.0);
  for (std::size_t j = 1; j <= kT; ++j) {
    const CxVec& fv = tf.f[kT - j];
    const CxVec& hv = tf.h[kT - j];
    for (std::size_t i = 0; i < phi.d; ++i) acc += (fv[i] - hv[i]) * lam[j][i] * delta;
  }
  // event part of h * dN~(T): sum of h(T - tau) over events
  for (std::size_t i = 0; i < phi.d; ++i)
    for (double tau : path.events[i]) {
      if (tau > T) break;
      const double pos = (T - tau) / delta;
      const auto k = std::min<std::size_t>(static_cast<std::size_t>(std::llround(pos)),
                                           tf.h.steps());
      acc += tf.h[k][i];
    }
  return acc;
}

McEstimate mc_fourier_laplace(const Kernel& phi, const ExogenousInput& mu,
                              const TestFunctions& tf, double T, std::size_t n_paths,
                              std::uint64_t seed, unsigned threads) {
  if (n_paths == 0) throw std::invalid_argument("mc_fourier_laplace: n_paths must be >= 1");
  std::vector<Cx> samples(n_paths);
  const unsigned nw = std::max(1u, threads);
  auto worker = [&](unsigned w) {
    for (std::size_t idx = w; idx < n_paths; idx += nw) {
      const HawkesPath path = simulate(phi, mu, T, path_seed(seed, idx));
      samples[idx] = std::exp(functional_sample(phi, mu, path, tf, T));
    }
  };
  if (nw == 1) {
    worker(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < nw; ++w) pool.emplace_back(worker, w);
    for (auto& th : pool) th.join();
  }

  // fixed-order reduction: results do not depend on the worker count
  Cx mean(0.0, 0.0);
  for (const Cx& z : samples) mean += z;
  mean /= static_cast<double>(n_paths);
  double var = 0.0;
  for (const Cx& z : samples) {
    const Cx dz = z - mean;
    var += dz.real() * dz.real() + dz.imag() * dz.imag();
  }
  var /= std::max<std::size_t>(1, n_paths - 1);
  return {mean, std::sqrt(var / static_cast<double>(n_paths)), n_paths};
}

RescaledPath rescale(HawkesPath base, ScalingScheme scheme) {
  RescaledPath rp;
  rp.scheme = scheme;
  rp.base = std::move(base);
  return rp;
}

namespace {

double check_horizon(const RescaledPath& rp, double t) {
  const double big_t = static_cast<double>(rp.scheme.n) * t;
  if (big_t > rp.base.horizon * (1.0 + 1e-12))
    throw std::invalid_argument("rescaled path: t beyond horizon / n");
  return big_t;
}

}  // namespace

Vec RescaledPath::count(double t) const {
  const double big_t = check_horizon(*this, t);
  const double denom = static_cast<double>(scheme.n) * scheme.theta_n;
  Vec out(base.events.size(), 0.0);
  for (std::size_t i = 0; i < base.events.size(); ++i) {
    const auto& ev = base.events[i];
    out[i] = static_cast<double>(
                 std::upper_bound(ev.begin(), ev.end(), big_t) - ev.begin()) /
             denom;
  }
  return out;
}

Vec RescaledPath::compensated(const Kernel& phi, const ExogenousInput& mu, double t) const {
  const double big_t = check_horizon(*this, t);
  const Vec ii = hawkvol::integrated_intensity(phi, mu, base, big_t);
  const double denom = std::sqrt(static_cast<double>(scheme.n) * scheme.theta_n);
  Vec out(base.events.size(), 0.0);
  for (std::size_t i = 0; i < base.events.size(); ++i) {
    const auto& ev = base.events[i];
    const double n_events =
        static_cast<double>(std::upper_bound(ev.begin(), ev.end(), big_t) - ev.begin());
    out[i] = (n_events - ii[i]) / denom;
  }
  return out;
}

Vec RescaledPath::integrated_intensity(const Kernel& phi, const ExogenousInput& mu,
                                       double t) const {
  const double big_t = check_horizon(*this, t);
  Vec out = hawkvol::integrated_intensity(phi, mu, base, big_t);
  const double denom = static_cast<double>(scheme.n) * scheme.theta_n;
  for (double& v : out) v /= denom;
  return out;
}

}  // namespace hawkvol
