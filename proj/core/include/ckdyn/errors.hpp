#pragma once

#include <stdexcept>
#include <string>

namespace ckdyn {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Arguments outside an operation's domain (bad physical parameters, wrong potential kind).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Invalid scenario or run configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Base for failures raised while integrating or evaluating a numerical state.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Gaussian shape parameter lost its positive imaginary part.
class NonNormalizableError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class OverflowError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Grid norm drifted beyond the per-step bound.
class InstabilityError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Grid spacing no longer resolves the momentum content of the state.
class ResolutionError : public NumericalError {
 public:
  ResolutionError(const std::string& what, double time) : NumericalError(what), time_(time) {}
  double time() const noexcept { return time_; }

 private:
  double time_;
};

/// Riccati shape flow hit a pole.
class SingularStateError : public NumericalError {
 public:
  SingularStateError(const std::string& what, double pole_time)
      : NumericalError(what), pole_time_(pole_time) {}
  double pole_time() const noexcept { return pole_time_; }

 private:
  double pole_time_;
};

/// A trajectory left the domain on which its velocity field is defined.
class TruncationError : public NumericalError {
 public:
  TruncationError(const std::string& what, double exit_time, std::size_t trajectory)
      : NumericalError(what), exit_time_(exit_time), trajectory_(trajectory) {}
  double exit_time() const noexcept { return exit_time_; }
  std::size_t trajectory() const noexcept { return trajectory_; }

 private:
  double exit_time_;
  std::size_t trajectory_;
};

}  // namespace ckdyn
