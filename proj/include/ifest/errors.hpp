#pragma once

#include <stdexcept>

namespace ifest {

/// Bad user-supplied configuration (CLI maps this to exit code 2).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Numerical failure during estimation (CLI maps this to exit code 3).
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace ifest
