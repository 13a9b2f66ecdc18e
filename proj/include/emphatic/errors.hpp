#pragma once

#include <stdexcept>
#include <string>

namespace emphatic {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An input tensor or table violates its documented invariants.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A dense linear system is singular (or too ill-conditioned to trust).
class SingularSystem : public Error {
 public:
  using Error::Error;
};

/// A stationary distribution could not be computed to tolerance.
class NonConvergent : public Error {
 public:
  using Error::Error;
};

class DegenerateProbability : public Error {
 public:
  using Error::Error;
};

class ZeroBehaviourDensity : public Error {
 public:
  using Error::Error;
};

class DivergenceDetected : public Error {
 public:
  using Error::Error;
};

class NonFiniteUpdate : public Error {
 public:
  using Error::Error;
};

class QuadratureFailure : public Error {
 public:
  using Error::Error;
};

class ConfigInvalid : public Error {
 public:
  using Error::Error;
};

class EmptyInput : public Error {
 public:
  using Error::Error;
};

class MixedMetricError : public Error {
 public:
  using Error::Error;
};

}  // namespace emphatic
