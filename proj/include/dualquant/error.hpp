#pragma once

#include <stdexcept>
#include <string>

namespace dualquant {

enum class ErrorKind {
  InvalidArgument,
  OutsideHull,
  NumericalFailure,
  TooLarge,
  SpanMismatch,
  OutsideRange,
  NormMismatch,
  TooFewPoints,
  Diverged,
  HypothesisViolation,
  DegenerateInput,
  ConfigError,
};

const char* to_string(ErrorKind kind);

// Single exception type for the library; callers dispatch on kind().
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::OutsideHull: return "OutsideHull";
    case ErrorKind::NumericalFailure: return "NumericalFailure";
    case ErrorKind::TooLarge: return "TooLarge";
    case ErrorKind::SpanMismatch: return "SpanMismatch";
    case ErrorKind::OutsideRange: return "OutsideRange";
    case ErrorKind::NormMismatch: return "NormMismatch";
    case ErrorKind::TooFewPoints: return "TooFewPoints";
    case ErrorKind::Diverged: return "Diverged";
    case ErrorKind::HypothesisViolation: return "HypothesisViolation";
    case ErrorKind::DegenerateInput: return "DegenerateInput";
    case ErrorKind::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

inline void require(bool condition, ErrorKind kind, const std::string& what) {
  if (!condition) throw Error(kind, what);
}

}  // namespace dualquant
