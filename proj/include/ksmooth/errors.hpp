#pragma once

#include <stdexcept>
#include <string>

namespace ksmooth {

// Base of every error raised by the library. Callers that only need a
// message can catch this; the CLI maps subclasses onto exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An argument lies outside the domain of an operator function
// (fractional power of a negative eigenvalue, theta outside (0, pi), ...).
class DomainError : public Error {
 public:
  DomainError(const std::string& what, double offending)
      : Error(what), offending_(offending) {}
  double offending() const noexcept { return offending_; }

 private:
  double offending_;
};

// Spectral parameter too close to the spectrum.
class SingularityError : public Error {
 public:
  SingularityError(const std::string& what, double nearest)
      : Error(what), nearest_(nearest) {}
  double nearest_eigenvalue() const noexcept { return nearest_; }

 private:
  double nearest_;
};

// Input object violates one of its structural invariants.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Bad user configuration: config files, grids, tolerance overrides.
class ConfigError : public Error {
 public:
  using Error::Error;
};

class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, int iterations)
      : Error(what), iterations_(iterations) {}
  int iterations() const noexcept { return iterations_; }

 private:
  int iterations_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace ksmooth
