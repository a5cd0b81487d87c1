#pragma once

#include <stdexcept>
#include <string>

namespace hawkvol {

/// Numerical guard tripped: iteration cap, explosion guard, unsupported regime.
/// Maps to CLI exit code 3.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

/// Invalid experiment configuration. Maps to CLI exit code 2.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace hawkvol
