#ifndef VID_ERRORS_HPP
#define VID_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace vid {

/// Bad user-facing input: malformed config, out-of-range model constants,
/// CFL-violating time step. CLI maps this to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Mathematically invalid arguments to library operations (negative rates,
/// p outside the admissible range, t < 0, ...).
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Runtime numerical failure: NaN/Inf detected mid-run, ODE step rejection.
/// CLI maps this to exit code 3.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace vid

#endif
