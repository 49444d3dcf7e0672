#pragma once

#include <stdexcept>
#include <string>

namespace sidm {

// Exit-code classes used by the CLI: config (1), data (2), numerical (3).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Optimizer or sampler failed to reach its stopping rule within budget.
struct ConvergenceError : NumericalError {
  using NumericalError::NumericalError;
};

}  // namespace sidm
