#pragma once

#include <stdexcept>
#include <string>

namespace krc {

// Base for everything thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid configuration or malformed input file; messages name the offending field.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Argument shape/dimension mismatch.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Regularized Gram matrix numerically not positive definite.
class FitError : public Error {
 public:
  FitError(const std::string& msg, double smallest_pivot)
      : Error(msg), smallest_pivot_(smallest_pivot) {}
  double smallest_pivot() const { return smallest_pivot_; }

 private:
  double smallest_pivot_;
};

// Gain synthesis impossible (uncontrollable/unobservable pair).
class SynthesisError : public Error {
 public:
  using Error::Error;
};

// Lyapunov equation has no PD solution (closed loop not Schur).
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

// A computed quantity failed an internal consistency check.
class NumericalError : public Error {
 public:
  using Error::Error;
};

// Non-finite state, input, or prediction during a run.
class SimulationError : public Error {
 public:
  using Error::Error;
};

}  // namespace krc
