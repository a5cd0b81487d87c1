#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hawkvol/bernstein.hpp"
#include "hawkvol/hawkes.hpp"
#include "hawkvol/kernels.hpp"
#include "hawkvol/riccati.hpp"

namespace hawkvol {

/// Parametric transform-argument forms sampled onto the experiment grid.
struct TestFunctionSpec {
  struct Component {
    enum class Form { constant, exp_decay, sin_imag };
    Form form = Form::constant;
    double re = 0.0, im = 0.0, rate = 0.0, amp = 0.0, omega = 0.0;
  };
  std::vector<Component> f;
  std::vector<Component> h;
  double T = 0.0;

  TestFunctions sample(double delta, std::size_t steps) const;
};

struct GridSpec {
  double delta = 0.0;
  double horizon = 0.0;
};

struct McSpec {
  std::size_t paths = 1;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  std::size_t event_log_paths = 0;  // export events.csv for this many paths
};

struct ScalingFamily {  // scalar affine family: Phi = b + c lambda, mu from a
  double a = 1.0, b = 0.5, c = 1.0;
};

struct ScalingSpec {
  std::vector<std::size_t> n_values;
  ScalingFamily family;
  double T = 2.0;
  std::size_t mc_paths = 0;
};

struct PotentialSpec {
  EbfMatrix ebf = EbfMatrix::scalar_power(0.0, 1.0, 1.0);
  std::vector<std::string> routes;  // subset of {"closed_form", "gs", "resolvent"}
  int gs_order = 14;
  double lambda_plus = 0.0;
};

struct SveSpec {
  std::string scheme;  // density | rough_cir | atom | pi0
  // kernel family (power: t^(alpha-1) e^(-beta t) / Gamma(alpha) / c;
  // exp: scale e^(-rate t))
  std::string kernel_type = "power";
  double alpha = 1.0, beta = 0.0, rate = 1.0, scale = 1.0;
  Vec a{1.0};
  Matrix b_mat{{0.5}};
  Vec c_diag{1.0};
  // baseline
  std::string upsilon_type = "linear";  // linear | cir
  double slope = 1.0;
  double atom = 0.0;
  Vec gamma_prime{1.0};
  std::size_t paths = 1000;
  std::size_t n_trajectories = 1;
  double T = 1.0;
};

struct ExperimentConfig {
  GridSpec grid;
  std::optional<Kernel> kernel;
  std::optional<ExogenousInput> exogenous;
  std::vector<TestFunctionSpec> test_functions;
  McSpec mc;
  std::vector<double> laplace_lambdas;
  std::optional<ScalingSpec> scaling;
  std::optional<PotentialSpec> potential;
  std::optional<SveSpec> sve;
  std::string output_dir = "out";
};

/// Parses and validates a JSON experiment config; throws ConfigError with a
/// message naming the offending field.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::string& path);

}  // namespace hawkvol
