#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace dffr {

enum class ErrorCode {
  NotDoublyStochastic,
  NotSymmetric,
  Disconnected,
  NonPositiveWeightFloor,
  DimensionMismatch,
  NonFiniteInput,
  ZNotInSet,
  InvalidSet,
  InvalidShrink,
  OutOfFeasibleSet,
  IndexOutOfRange,
  OracleDisagreement,
  EvaluationOutsideX,
  InvalidArgument,
  RhoOutOfRange,
  RhoNotGreaterThanLambda,
  ParseError,
  ConstraintViolation,
  UnknownParameter,
  SchemaVersionMismatch,
  IoError,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NotDoublyStochastic: return "NotDoublyStochastic";
    case ErrorCode::NotSymmetric: return "NotSymmetric";
    case ErrorCode::Disconnected: return "Disconnected";
    case ErrorCode::NonPositiveWeightFloor: return "NonPositiveWeightFloor";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NonFiniteInput: return "NonFiniteInput";
    case ErrorCode::ZNotInSet: return "ZNotInSet";
    case ErrorCode::InvalidSet: return "InvalidSet";
    case ErrorCode::InvalidShrink: return "InvalidShrink";
    case ErrorCode::OutOfFeasibleSet: return "OutOfFeasibleSet";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::OracleDisagreement: return "OracleDisagreement";
    case ErrorCode::EvaluationOutsideX: return "EvaluationOutsideX";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::RhoOutOfRange: return "RhoOutOfRange";
    case ErrorCode::RhoNotGreaterThanLambda: return "RhoNotGreaterThanLambda";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ConstraintViolation: return "ConstraintViolation";
    case ErrorCode::UnknownParameter: return "UnknownParameter";
    case ErrorCode::SchemaVersionMismatch: return "SchemaVersionMismatch";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

/// Library-wide exception. Every failure carries a machine-checkable code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace dffr
