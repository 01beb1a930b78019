#pragma once

#include <stdexcept>
#include <string>

namespace leotrack {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on the shape or structure of an argument was violated.
class ContractViolation : public Error {
 public:
  using Error::Error;
};

/// Geometry is undefined at the requested configuration (coincident points,
/// boresight azimuth, degenerate frame).
class GeometryError : public Error {
 public:
  using Error::Error;
};

/// A rough estimator or LS recovery could not produce a value.
class EstimationError : public Error {
 public:
  using Error::Error;
};

/// Fisher information is singular or ill conditioned.
class CrlbError : public Error {
 public:
  using Error::Error;
};

/// EKF update could not be applied (singular innovation covariance).
class UpdateError : public Error {
 public:
  using Error::Error;
};

/// Scenario parse or validation failure. The message names the offending key.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& key, const std::string& what)
      : Error(key + ": " + what), key_(key) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

}  // namespace leotrack
