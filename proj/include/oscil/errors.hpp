#pragma once

#include <stdexcept>
#include <string>

namespace oscil {

/// Base class for all errors raised by this library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// The exact (symbolic) and numeric integration paths reached different
/// conclusions; usually a sign that the quadrature configuration is too loose.
struct NumericSymbolicMismatch : Error {
  using Error::Error;
};

/// A tail-kernel integral was requested for a coefficient function whose
/// moment integral diverges, so the tail is infinite.
struct TailDiverges : Error {
  using Error::Error;
};

/// The adaptive quadrature could not reach the requested tolerance within its
/// subdivision budget.
struct QuadratureFailure : Error {
  using Error::Error;
};

/// An operation requiring validated hypotheses was called on a system that
/// violates them.
struct HypothesisViolation : Error {
  using Error::Error;
};

/// Initial state dimensions do not match the declared orders.
struct InvalidInit : Error {
  using Error::Error;
};

/// A classification was requested for a trajectory that did not complete.
struct IncompleteTrajectory : Error {
  using Error::Error;
};

/// The nested integral defining P diverges; the system is not in the
/// necessity regime.
struct DivergentP : Error {
  using Error::Error;
};

/// P vanished (zero outer coefficient); the constant K1 is undefined.
struct DegenerateP : Error {
  using Error::Error;
};

/// The scan for an admissible truncation point T exhausted its horizon.
struct NoAdmissibleT : Error {
  using Error::Error;
};

/// An iterate left the ball of radius 2*K1; T was chosen too small.
struct X1Escape : Error {
  using Error::Error;
};

/// A verification check on a constructed solution failed.
struct VerificationFailure : Error {
  using Error::Error;
};

/// Malformed or inconsistent run configuration.
struct ConfigError : Error {
  using Error::Error;
};

}  // namespace oscil
