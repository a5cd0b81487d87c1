#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "hawkvol/config.hpp"

namespace hawkvol {

struct RunOptions {
  std::string out_dir;  // overrides config output.dir when nonempty
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
};

/// Experiment commands; each validates the pieces of the config it needs,
/// writes CSV files into the output directory, and throws ConfigError /
/// NumericalError on the corresponding failures.
void cmd_resolvent(const ExperimentConfig& cfg, const RunOptions& opts);
void cmd_fl_verify(const ExperimentConfig& cfg, const RunOptions& opts);
void cmd_scaling_study(const ExperimentConfig& cfg, const RunOptions& opts);
void cmd_sve(const ExperimentConfig& cfg, const RunOptions& opts);
void cmd_potential(const ExperimentConfig& cfg, const RunOptions& opts);

/// Dispatch by subcommand name; returns false for unknown names.
bool run_command(const std::string& name, const ExperimentConfig& cfg, const RunOptions& opts);

}  // namespace hawkvol
