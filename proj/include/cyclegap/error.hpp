#pragma once

#include <stdexcept>
#include <string>

namespace cyclegap {

enum class Errc {
  InvalidDimension,
  InvalidParameter,
  InfeasibleDegree,
  Parity,
  DimensionMismatch,
  InvariantViolation,
  ZeroVector,
  Domain,
  TooFewRecords,
  NonPositive,
  Parse,
  SamplingFailure,
  SizeLimit,
  NumericalFailure,
  NotStochastic,
  Consistency,
  SingularExpansion,
  Contradiction,
  Io,
};

/// Coarse failure class; maps one-to-one onto CLI exit codes 1/2/3.
enum class ErrorCategory { Validation = 1, Numerical = 2, Io = 3 };

constexpr ErrorCategory category_of(Errc code) noexcept {
  switch (code) {
    case Errc::SamplingFailure:
    case Errc::SizeLimit:
    case Errc::NumericalFailure:
    case Errc::NotStochastic:
    case Errc::Consistency:
    case Errc::SingularExpansion:
    case Errc::Contradiction:
      return ErrorCategory::Numerical;
    case Errc::Io:
      return ErrorCategory::Io;
    default:
      return ErrorCategory::Validation;
  }
}

constexpr const char* errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::InvalidDimension: return "invalid-dimension";
    case Errc::InvalidParameter: return "invalid-parameter";
    case Errc::InfeasibleDegree: return "infeasible-degree";
    case Errc::Parity: return "parity";
    case Errc::DimensionMismatch: return "dimension-mismatch";
    case Errc::InvariantViolation: return "invariant-violation";
    case Errc::ZeroVector: return "zero-vector";
    case Errc::Domain: return "domain";
    case Errc::TooFewRecords: return "too-few-records";
    case Errc::NonPositive: return "non-positive";
    case Errc::Parse: return "parse";
    case Errc::SamplingFailure: return "sampling-failure";
    case Errc::SizeLimit: return "size-limit";
    case Errc::NumericalFailure: return "numerical-failure";
    case Errc::NotStochastic: return "not-stochastic";
    case Errc::Consistency: return "consistency";
    case Errc::SingularExpansion: return "singular-expansion";
    case Errc::Contradiction: return "contradiction";
    case Errc::Io: return "io";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }
  ErrorCategory category() const noexcept { return category_of(code_); }

 private:
  Errc code_;
};

}  // namespace cyclegap
