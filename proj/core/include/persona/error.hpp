#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace persona {

enum class ErrorCode {
  // dataio
  MissingColumn,
  NonFiniteValue,
  TimestampRegression,
  EmptyFile,
  TooShort,
  InvalidSpec,
  IoFailure,
  VersionMismatch,
  CorruptModel,
  BadManifest,
  // signal / features
  EmptyInput,
  DegenerateSeries,
  BadLength,
  WindowMismatch,
  // classify / select
  InsufficientSamples,
  SingularCovariance,
  NonFiniteInput,
  DimensionMismatch,
  EmptyFeatureSet,
  // eval
  InsufficientSubjects,
  MissingSplit,
  MissingLabels,
  LengthMismatch,
  Empty,
  DivisionByZero,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure raised by the library. `code()` identifies the contract
/// that was violated; `what()` carries the detail (row, label, subject...).
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace persona
