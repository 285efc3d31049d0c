#ifndef OMOD_ERRORS_HPP
#define OMOD_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace omod {

struct DivergedError : std::runtime_error {
  double t_fail;
  DivergedError(const std::string& what, double t)
      : std::runtime_error(what), t_fail(t) {}
};

struct NotConvergedError : std::runtime_error {
  double residual;
  NotConvergedError(const std::string& what, double res)
      : std::runtime_error(what), residual(res) {}
};

struct ResonantDenominatorError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RealityViolationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct FrequencyMismatchError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct UnstableError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct UnphysicalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SolveFailedError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NumericalDomainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace omod

#endif
