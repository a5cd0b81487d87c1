#include "hawkvol/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "hawkvol/errors.hpp"

namespace hawkvol {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& field, const std::string& why) {
  throw ConfigError(field + ": " + why);
}

double req_number(const json& j, const std::string& path, const char* key) {
  if (!j.contains(key)) fail(path + "." + key, "missing");
  if (!j[key].is_number()) fail(path + "." + key, "must be a number");
  return j[key].get<double>();
}

double opt_number(const json& j, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  return j[key].get<double>();
}

KernelTerm parse_term(const json& j, const std::string& path) {
  if (!j.is_object() || !j.contains("family")) fail(path, "kernel term must name a family");
  const std::string fam = j["family"].get<std::string>();
  KernelTerm term;
  if (fam == "zero") {
    term = KernelTerm{};
  } else if (fam == "exponential") {
    term = KernelTerm::exponential(req_number(j, path, "a"), req_number(j, path, "b"));
  } else if (fam == "powerlaw") {
    term = KernelTerm::powerlaw(req_number(j, path, "a"), req_number(j, path, "kappa"),
                                opt_number(j, "tilt", 0.0));
  } else if (fam == "gammaish") {
    term = KernelTerm::gammaish(req_number(j, path, "a"), req_number(j, path, "alpha"),
                                req_number(j, path, "beta"));
  } else if (fam == "histogram") {
    if (!j.contains("edges") || !j.contains("levels")) fail(path, "histogram needs edges/levels");
    term = KernelTerm::histogram(j["edges"].get<std::vector<double>>(),
                                 j["levels"].get<std::vector<double>>());
  } else {
    fail(path + ".family", "unknown family '" + fam + "'");
  }
  const std::string err = term.validate();
  if (!err.empty()) fail(path, err);
  return term;
}

Kernel parse_kernel(const json& j) {
  if (!j.contains("d")) fail("kernel.d", "missing");
  const std::size_t d = j["d"].get<std::size_t>();
  if (d == 0 || d > 8) fail("kernel.d", "must be in 1..8");
  Kernel k(d);
  if (!j.contains("entries") || !j["entries"].is_array() || j["entries"].size() != d)
    fail("kernel.entries", "must be a d x d array of term objects");
  for (std::size_t i = 0; i < d; ++i) {
    const json& row = j["entries"][i];
    if (!row.is_array() || row.size() != d)
      fail("kernel.entries[" + std::to_string(i) + "]", "must have d columns");
    for (std::size_t c = 0; c < d; ++c) {
      const std::string path =
          "kernel.entries[" + std::to_string(i) + "][" + std::to_string(c) + "]";
      const json& cell = row[c];
      if (cell.is_array()) {
        for (std::size_t t = 0; t < cell.size(); ++t)
          k.at(i, c).terms.push_back(parse_term(cell[t], path + "[" + std::to_string(t) + "]"));
      } else {
        k.at(i, c).terms.push_back(parse_term(cell, path));
      }
    }
  }
  return k;
}

Matrix parse_matrix(const json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) fail(path, "must be a nonempty array of rows");
  const std::size_t rows = j.size();
  const std::size_t cols = j[0].is_array() ? j[0].size() : 0;
  if (cols == 0) fail(path, "rows must be arrays");
  Matrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    if (!j[i].is_array() || j[i].size() != cols) fail(path, "ragged rows");
    for (std::size_t c = 0; c < cols; ++c) m(i, c) = j[i][c].get<double>();
  }
  return m;
}

ExogenousInput parse_exogenous(const json& j, std::size_t d) {
  const std::string type = j.contains("type") ? j["type"].get<std::string>() : "constant";
  if (type == "constant") {
    if (!j.contains("mu")) fail("exogenous.mu", "missing");
    return ExogenousInput::constant(j["mu"].get<Vec>());
  }
  if (type == "total_impact") {
    if (!j.contains("A")) fail("exogenous.A", "missing");
    const std::size_t col = j.contains("column") ? j["column"].get<std::size_t>() : 0;
    return ExogenousInput::total_impact(parse_matrix(j["A"], "exogenous.A"), col);
  }
  fail("exogenous.type", "unknown type '" + type + "'");
}

TestFunctionSpec::Component parse_component(const json& j, const std::string& path) {
  TestFunctionSpec::Component c;
  const std::string type = j.contains("type") ? j["type"].get<std::string>() : "constant";
  if (type == "constant") {
    c.form = TestFunctionSpec::Component::Form::constant;
    c.re = opt_number(j, "re", 0.0);
    c.im = opt_number(j, "im", 0.0);
  } else if (type == "exp_decay") {
    c.form = TestFunctionSpec::Component::Form::exp_decay;
    c.re = opt_number(j, "re", 0.0);
    c.im = opt_number(j, "im", 0.0);
    c.rate = req_number(j, path, "rate");
    if (c.rate < 0.0) fail(path + ".rate", "must be >= 0");
  } else if (type == "sin_imag") {
    c.form = TestFunctionSpec::Component::Form::sin_imag;
    c.amp = req_number(j, path, "amp");
    c.omega = req_number(j, path, "omega");
  } else {
    fail(path + ".type", "unknown form '" + type + "'");
  }
  return c;
}

TestFunctionSpec parse_tf(const json& j, const std::string& path) {
  TestFunctionSpec spec;
  if (!j.contains("f") || !j.contains("h")) fail(path, "needs f and h component arrays");
  for (std::size_t i = 0; i < j["f"].size(); ++i)
    spec.f.push_back(parse_component(j["f"][i], path + ".f[" + std::to_string(i) + "]"));
  for (std::size_t i = 0; i < j["h"].size(); ++i)
    spec.h.push_back(parse_component(j["h"][i], path + ".h[" + std::to_string(i) + "]"));
  if (spec.f.size() != spec.h.size()) fail(path, "f and h must have equal dimension");
  spec.T = req_number(j, path, "T");
  if (spec.T <= 0.0) fail(path + ".T", "must be > 0");
  return spec;
}

EbfMatrix parse_ebf(const json& j, const std::string& path) {
  const std::string kind = j.contains("kind") ? j["kind"].get<std::string>() : "power";
  if (kind == "power") {
    const double drift = opt_number(j, "drift", 0.0);
    const double c = req_number(j, path, "c");
    const double alpha = opt_number(j, "alpha", 1.0);
    const double beta = opt_number(j, "beta", 0.0);
    try {
      return EbfMatrix::scalar_power(drift, c, alpha, beta);
    } catch (const std::invalid_argument& e) {
      fail(path, e.what());
    }
  }
  if (kind == "triplet") {
    LevyMeasure nu;
    if (j.contains("atoms"))
      for (const auto& a : j["atoms"]) {
        Matrix w(1, 1);
        w(0, 0) = a["weight"].get<double>();
        nu.atoms.emplace_back(a["t"].get<double>(), w);
      }
    if (j.contains("cells"))
      for (const auto& cjson : j["cells"]) {
        LevyMeasure::Cell cell;
        cell.lo = cjson["lo"].get<double>();
        cell.hi = cjson["hi"].get<double>();
        cell.mass = Matrix(1, 1);
        cell.mass(0, 0) = cjson["mass"].get<double>();
        nu.cells.push_back(cell);
      }
    try {
      return EbfMatrix::scalar_triplet(opt_number(j, "b", 0.0), opt_number(j, "sigma", 0.0),
                                       std::move(nu));
    } catch (const std::invalid_argument& e) {
      fail(path, e.what());
    }
  }
  fail(path + ".kind", "unknown kind '" + kind + "'");
}

}  // namespace

TestFunctions TestFunctionSpec::sample(double delta, std::size_t steps) const {
  const std::size_t d = f.size();
  TestFunctions tf;
  tf.f = Grid<CxVec>(delta, steps, CxVec(d, Cx(0, 0)));
  tf.h = Grid<CxVec>(delta, steps, CxVec(d, Cx(0, 0)));
  auto eval = [](const Component& c, double t) {
    switch (c.form) {
      case Component::Form::constant:
        return Cx(c.re, c.im);
      case Component::Form::exp_decay:
        return Cx(c.re, c.im) * std::exp(-c.rate * t);
      case Component::Form::sin_imag:
        return Cx(0.0, c.amp * std::sin(c.omega * t));
    }
    return Cx(0.0, 0.0);
  };
  for (std::size_t k = 0; k <= steps; ++k) {
    const double t = delta * static_cast<double>(k);
    for (std::size_t i = 0; i < d; ++i) {
      tf.f[k][i] = eval(f[i], t);
      tf.h[k][i] = eval(h[i], t);
    }
  }
  const std::string err = tf.validate();
  if (!err.empty()) throw ConfigError("test_functions: " + err);
  return tf;
}

ExperimentConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  ExperimentConfig cfg;

  if (!j.contains("grid")) fail("grid", "missing");
  cfg.grid.delta = req_number(j["grid"], "grid", "delta");
  cfg.grid.horizon = req_number(j["grid"], "grid", "horizon");
  if (!(cfg.grid.delta > 0.0)) fail("grid.delta", "must be > 0");
  if (!(cfg.grid.horizon >= cfg.grid.delta)) fail("grid.horizon", "must be >= delta");

  if (j.contains("kernel")) {
    cfg.kernel = parse_kernel(j["kernel"]);
    const std::string err = cfg.kernel->validate();
    if (!err.empty()) fail("kernel", err);
  }
  if (j.contains("exogenous")) {
    if (!cfg.kernel) fail("exogenous", "requires a kernel");
    cfg.exogenous = parse_exogenous(j["exogenous"], cfg.kernel->d);
    const std::string err = cfg.exogenous->validate(cfg.kernel->d);
    if (!err.empty()) fail("exogenous", err);
  }
  if (j.contains("test_functions")) {
    const json& tfs = j["test_functions"];
    if (!tfs.is_array()) fail("test_functions", "must be an array");
    for (std::size_t i = 0; i < tfs.size(); ++i)
      cfg.test_functions.push_back(
          parse_tf(tfs[i], "test_functions[" + std::to_string(i) + "]"));
  }
  if (j.contains("mc")) {
    const json& m = j["mc"];
    cfg.mc.paths = m.contains("paths") ? m["paths"].get<std::size_t>() : 1;
    if (cfg.mc.paths < 1) fail("mc.paths", "must be >= 1");
    cfg.mc.seed = m.contains("seed") ? m["seed"].get<std::uint64_t>() : 1;
    cfg.mc.threads = m.contains("threads") ? m["threads"].get<unsigned>() : 1;
    if (cfg.mc.threads < 1) fail("mc.threads", "must be >= 1");
    if (m.contains("event_log_paths"))
      cfg.mc.event_log_paths = m["event_log_paths"].get<std::size_t>();
  }
  if (j.contains("laplace_lambdas")) cfg.laplace_lambdas = j["laplace_lambdas"].get<std::vector<double>>();

  if (j.contains("scaling")) {
    const json& s = j["scaling"];
    ScalingSpec spec;
    if (!s.contains("n_values") || s["n_values"].empty()) fail("scaling.n_values", "missing");
    spec.n_values = s["n_values"].get<std::vector<std::size_t>>();
    for (std::size_t n : spec.n_values)
      if (n < 2) fail("scaling.n_values", "entries must be >= 2");
    if (s.contains("family")) {
      spec.family.a = opt_number(s["family"], "a", 1.0);
      spec.family.b = opt_number(s["family"], "b", 0.5);
      spec.family.c = opt_number(s["family"], "c", 1.0);
      if (spec.family.c <= 0.0) fail("scaling.family.c", "must be > 0");
      if (spec.family.a < 0.0) fail("scaling.family.a", "must be >= 0");
    }
    spec.T = opt_number(s, "T", 2.0);
    if (spec.T <= 0.0) fail("scaling.T", "must be > 0");
    spec.mc_paths = s.contains("mc_paths") ? s["mc_paths"].get<std::size_t>() : 0;
    cfg.scaling = spec;
  }

  if (j.contains("potential")) {
    const json& p = j["potential"];
    PotentialSpec spec;
    if (!p.contains("ebf")) fail("potential.ebf", "missing");
    spec.ebf = parse_ebf(p["ebf"], "potential.ebf");
    spec.routes = p.contains("routes") ? p["routes"].get<std::vector<std::string>>()
                                       : std::vector<std::string>{"gs"};
    for (const std::string& r : spec.routes)
      if (r != "closed_form" && r != "gs" && r != "resolvent")
        fail("potential.routes", "unknown route '" + r + "'");
    spec.gs_order = p.contains("gs_order") ? p["gs_order"].get<int>() : 14;
    if (spec.gs_order < 2 || spec.gs_order > 18 || spec.gs_order % 2 != 0)
      fail("potential.gs_order", "must be even in 2..18");
    spec.lambda_plus = opt_number(p, "lambda_plus", 0.0);
    cfg.potential = spec;
  }

  if (j.contains("sve")) {
    const json& s = j["sve"];
    SveSpec spec;
    if (!s.contains("scheme")) fail("sve.scheme", "missing");
    spec.scheme = s["scheme"].get<std::string>();
    if (spec.scheme != "density" && spec.scheme != "rough_cir" && spec.scheme != "atom" &&
        spec.scheme != "pi0")
      fail("sve.scheme", "unknown scheme '" + spec.scheme + "'");
    spec.kernel_type = s.contains("kernel_type") ? s["kernel_type"].get<std::string>() : "power";
    if (spec.kernel_type != "power" && spec.kernel_type != "exp")
      fail("sve.kernel_type", "must be 'power' or 'exp'");
    spec.alpha = opt_number(s, "alpha", 1.0);
    spec.beta = opt_number(s, "beta", 0.0);
    spec.rate = opt_number(s, "rate", 1.0);
    spec.scale = opt_number(s, "scale", 1.0);
    if (s.contains("a")) spec.a = s["a"].get<Vec>();
    if (s.contains("b")) spec.b_mat = parse_matrix(s["b"], "sve.b");
    if (s.contains("c")) spec.c_diag = s["c"].get<Vec>();
    for (double ci : spec.c_diag)
      if (!(ci > 0.0)) fail("sve.c", "entries must be > 0");
    spec.upsilon_type = s.contains("upsilon_type") ? s["upsilon_type"].get<std::string>() : "linear";
    if (spec.upsilon_type != "linear" && spec.upsilon_type != "cir")
      fail("sve.upsilon_type", "must be 'linear' or 'cir'");
    spec.slope = opt_number(s, "slope", 1.0);
    if (spec.slope < 0.0) fail("sve.slope", "must be >= 0");
    spec.atom = opt_number(s, "atom", 0.0);
    if (spec.atom < 0.0) fail("sve.atom", "must be >= 0");
    if (s.contains("gamma_prime")) spec.gamma_prime = s["gamma_prime"].get<Vec>();
    spec.paths = s.contains("paths") ? s["paths"].get<std::size_t>() : 1000;
    if (spec.paths < 1) fail("sve.paths", "must be >= 1");
    spec.n_trajectories = s.contains("n_trajectories") ? s["n_trajectories"].get<std::size_t>() : 1;
    spec.T = opt_number(s, "T", 1.0);
    if (spec.T <= 0.0) fail("sve.T", "must be > 0");
    cfg.sve = spec;
  }

  if (j.contains("output") && j["output"].contains("dir"))
    cfg.output_dir = j["output"]["dir"].get<std::string>();
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace hawkvol
