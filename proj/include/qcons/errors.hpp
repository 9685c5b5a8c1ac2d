#pragma once

#include <stdexcept>
#include <string>

namespace qcons {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Raised for physically or mathematically invalid inputs (exit code 3 in the CLI).
class PhysicsError : public Error {
public:
  using Error::Error;
};

class InvalidParameterError : public PhysicsError {
public:
  using PhysicsError::PhysicsError;
};

class CoincidentPointsError : public PhysicsError {
public:
  using PhysicsError::PhysicsError;
};

class ResidualTooLargeError : public PhysicsError {
public:
  using PhysicsError::PhysicsError;
};

class NotRealizableError : public PhysicsError {
public:
  using PhysicsError::PhysicsError;
};

/// Adjacent eigenvalues closer than the gap tolerance.
class DegenerateSpectrumError : public PhysicsError {
public:
  using PhysicsError::PhysicsError;
};

class NoConvergenceError : public PhysicsError {
public:
  using PhysicsError::PhysicsError;
};

class BlowUpError : public PhysicsError {
public:
  using PhysicsError::PhysicsError;
};

/// The ensemble density at a probe is below the vacuum floor.
class VacuumProbeError : public PhysicsError {
public:
  using PhysicsError::PhysicsError;
};

class InsufficientOverlapError : public PhysicsError {
public:
  using PhysicsError::PhysicsError;
};

class UnattainableTargetError : public PhysicsError {
public:
  using PhysicsError::PhysicsError;
};

class ResolutionError : public PhysicsError {
public:
  using PhysicsError::PhysicsError;
};

class UnsupportedSymbolError : public PhysicsError {
public:
  using PhysicsError::PhysicsError;
};

class GridTooLargeError : public PhysicsError {
public:
  using PhysicsError::PhysicsError;
};

/// Configuration could not be parsed or failed schema validation.
class ConfigError : public Error {
public:
  using Error::Error;
};

}  // namespace qcons
