#pragma once

#include <stdexcept>
#include <string>

namespace rpc {

/// Base class for all contract violations raised by this library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// A matrix that must be nonzero is identically zero.
class ZeroMatrixError : public Error {
 public:
  using Error::Error;
};

/// Operand dimensions are inconsistent with the declared partition.
class DimensionMismatchError : public Error {
 public:
  using Error::Error;
};

/// Integrator step does not tile a constant-control piece.
class StepMismatchError : public Error {
 public:
  using Error::Error;
};

/// Base input leaves no room for the perturbation radius.
class InadmissibleBaseError : public Error {
 public:
  using Error::Error;
};

/// Perturbation directions do not span the input space.
class SingularExcitationError : public Error {
 public:
  using Error::Error;
};

/// Identified gain is too small for the Lipschitz cone over the neighborhood.
class DegenerateGainError : public Error {
 public:
  using Error::Error;
};

/// Query point lies outside the proxy domain ball.
class OutsideDomainError : public Error {
 public:
  using Error::Error;
};

/// Drift magnitude exceeds the guaranteed gain, b_tilde <= 0.
class DriftDominatesError : public Error {
 public:
  using Error::Error;
};

/// Input ball radius exceeds the norm of its own center.
class RestViolationError : public Error {
 public:
  using Error::Error;
};

/// Off-center input ball is invalid, radius exceeds the center norm.
class InvalidInputBallError : public Error {
 public:
  using Error::Error;
};

/// Actuated anchor is too close to rest to define a travel direction.
class NearRestError : public Error {
 public:
  using Error::Error;
};

/// Clouds being combined were not computed at the same anchor.
class AnchorMismatchError : public Error {
 public:
  using Error::Error;
};

/// Sphere of radius r around the reference ray misses the current state.
class NoIntersectionError : public Error {
 public:
  using Error::Error;
};

/// Target displacement is zero where a direction is required.
class ZeroDisplacementError : public Error {
 public:
  using Error::Error;
};

/// Path segment has (near) zero length where a direction is required.
class DegenerateSegmentError : public Error {
 public:
  using Error::Error;
};

/// Point cloud is empty where at least one point is required.
class EmptyCloudError : public Error {
 public:
  using Error::Error;
};

/// Expected log file is missing from a run directory.
class MissingLogError : public Error {
 public:
  using Error::Error;
};

/// Configuration file failed validation; message names the offending key.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace rpc
