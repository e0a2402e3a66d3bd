#pragma once

#include <stdexcept>
#include <string>

namespace dse {

/// Invalid configuration, parameters, or file schema (CLI exit code 2).
class ConfigError : public std::runtime_error {
public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Simulated scenario left the model's validity region (CLI exit code 3).
class InstabilityError : public std::runtime_error {
public:
  explicit InstabilityError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Numerical failure inside an estimator run (CLI exit code 4).
class NumericalError : public std::runtime_error {
public:
  explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace dse
