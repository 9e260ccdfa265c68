#pragma once

#include <stdexcept>
#include <string>

namespace segflow {

// Base of every error raised by the library. The CLI maps the concrete type
// to a process exit code (see harness/runner.hpp).
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
public:
  using Error::Error;
};

class RangeError : public Error {
public:
  using Error::Error;
};

class ShapeError : public Error {
public:
  using Error::Error;
};

class CapacityError : public Error {
public:
  using Error::Error;
};

class DomainError : public Error {
public:
  using Error::Error;
};

class NumericError : public Error {
public:
  using Error::Error;
};

// Drift or diffusion produced a non-finite value while integrating.
class NumericBlowup : public NumericError {
public:
  NumericBlowup(const std::string& what, double time)
      : NumericError(what + " at t=" + std::to_string(time)), time_(time) {}

  double time() const { return time_; }

private:
  double time_;
};

class EllipticityViolation : public Error {
public:
  using Error::Error;
};

// Two estimators that must agree (up to noise) drifted apart beyond tolerance.
class EstimatorInconsistency : public Error {
public:
  using Error::Error;
};

} // namespace segflow
