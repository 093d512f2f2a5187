#ifndef HLORA_ERROR_HPP
#define HLORA_ERROR_HPP

#include <stdexcept>
#include <string>

namespace hlora {

/// Shape or index contract violated by a caller.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Iterative routine hit its iteration cap.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// NaN or Inf produced or consumed where only finite values are allowed.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad configuration value; the message names the offending field.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace hlora

#endif  // HLORA_ERROR_HPP
