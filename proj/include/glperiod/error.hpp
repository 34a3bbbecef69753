#pragma once

#include <cstdio>
#include <stdexcept>
#include <string>

namespace glperiod {

/// Short scientific rendering of a double for messages.
inline std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A configuration value violates a documented invariant.
class ConfigError : public Error {
 public:
  using Error::Error;
};

class RepresentationMismatch : public Error {
 public:
  using Error::Error;
};

class GridMismatch : public Error {
 public:
  using Error::Error;
};

/// The mean (xi = 0) mode of an input to the period-map inverse is not
/// negligible. Raised for forcings that are not odd in space.
class ZeroModeViolation : public Error {
 public:
  using Error::Error;
};

/// A field acquired NaN/Inf entries: the iteration or the time integration
/// left its basin.
class NonFiniteField : public Error {
 public:
  using Error::Error;
};

class SeamDecayViolation : public Error {
 public:
  using Error::Error;
};

class OddnessViolation : public Error {
 public:
  using Error::Error;
};

/// Not enough samples / history for a fit or an estimate.
class InsufficientData : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace glperiod
