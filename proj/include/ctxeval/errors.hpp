#pragma once

#include <stdexcept>
#include <string>

namespace ctxeval {

/// Calibration futures carry no scale information (mean range 0).
class CalibrationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent run configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A completion endpoint could not be reached or refused the request.
class EndpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ctxeval
