#pragma once

#include <stdexcept>
#include <string>

namespace cfp {

enum class ErrorKind {
  InvalidArgument,
  NumericalInput,
  InvalidInitialData,
  InvalidParameter,
  NegativityAbort,
  UnstableStep,
  SupercriticalAmplitude,
  Unsupported,
  NoCriticalAmplitude,
  OutOfRegime,
  OutOfRange,
  Config,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "invalid-argument";
    case ErrorKind::NumericalInput: return "numerical-input";
    case ErrorKind::InvalidInitialData: return "invalid-initial-data";
    case ErrorKind::InvalidParameter: return "invalid-parameter";
    case ErrorKind::NegativityAbort: return "negativity-abort";
    case ErrorKind::UnstableStep: return "unstable-step";
    case ErrorKind::SupercriticalAmplitude: return "supercritical-amplitude";
    case ErrorKind::Unsupported: return "unsupported";
    case ErrorKind::NoCriticalAmplitude: return "no-critical-amplitude";
    case ErrorKind::OutOfRegime: return "out-of-regime";
    case ErrorKind::OutOfRange: return "out-of-range";
    case ErrorKind::Config: return "config";
  }
  return "unknown";
}

/// Single exception type for the library; callers branch on kind().
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Raised by the stepper when a cell drops below the negativity tolerance.
class NegativityAbort : public Error {
 public:
  NegativityAbort(double time, double min_value)
      : Error(ErrorKind::NegativityAbort,
              "value " + std::to_string(min_value) + " at t=" + std::to_string(time)),
        time_(time),
        min_value_(min_value) {}

  double time() const noexcept { return time_; }
  double min_value() const noexcept { return min_value_; }

 private:
  double time_;
  double min_value_;
};

}  // namespace cfp
