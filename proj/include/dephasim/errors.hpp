#pragma once

#include <stdexcept>
#include <string>

namespace dephasim {

/// Invalid input: malformed lattice, bad dimensions, bad configuration field.
class SpecificationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Numerical failure during time propagation. Carries the simulation time at
/// which the failure was detected.
class IntegrationError : public std::runtime_error {
 public:
  IntegrationError(const std::string& what, double time)
      : std::runtime_error(what + " (t = " + std::to_string(time) + ")"), time_(time) {}

  double time() const noexcept { return time_; }

 private:
  double time_;
};

/// Population data that cannot be a probability distribution.
class DataQualityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Power-law fit requested over data that has no logarithm.
class FitDomainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace dephasim
