#ifndef HSFLOW_ERRORS_HPP
#define HSFLOW_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace hs {

/// Requested point/parameter outside the configured region of validity.
struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

/// Operation unsupported for the given input (e.g. non-radial form).
struct UnsupportedError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Root bracket for the radial breakpoint does not contain the target.
struct NoBreakpointError : std::domain_error {
  using std::domain_error::domain_error;
};

/// Iterative solver hit its sweep limit; carries the achieved residual.
struct IterationLimitError : std::runtime_error {
  double residual;
  IterationLimitError(const std::string& msg, double res)
      : std::runtime_error(msg), residual(res) {}
};

/// Domain topology rules out the requested construction (e.g. Riemann map
/// of a multiply connected domain).
struct TopologyError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Conformal map failed to meet its tolerance; carries achieved value.
struct MapError : std::runtime_error {
  double achieved;
  MapError(const std::string& msg, double a) : std::runtime_error(msg), achieved(a) {}
};

/// Marker front self-intersects (or comes within the contact threshold).
struct BreakdownError : std::runtime_error {
  double time;
  BreakdownError(const std::string& msg, double t) : std::runtime_error(msg), time(t) {}
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace hs

#endif
