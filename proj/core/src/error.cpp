#include "persona/error.hpp"

namespace persona {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::MissingColumn: return "MissingColumn";
    case ErrorCode::NonFiniteValue: return "NonFiniteValue";
    case ErrorCode::TimestampRegression: return "TimestampRegression";
    case ErrorCode::EmptyFile: return "EmptyFile";
    case ErrorCode::TooShort: return "TooShort";
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::IoFailure: return "IoFailure";
    case ErrorCode::VersionMismatch: return "VersionMismatch";
    case ErrorCode::CorruptModel: return "CorruptModel";
    case ErrorCode::BadManifest: return "BadManifest";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::DegenerateSeries: return "DegenerateSeries";
    case ErrorCode::BadLength: return "BadLength";
    case ErrorCode::WindowMismatch: return "WindowMismatch";
    case ErrorCode::InsufficientSamples: return "InsufficientSamples";
    case ErrorCode::SingularCovariance: return "SingularCovariance";
    case ErrorCode::NonFiniteInput: return "NonFiniteInput";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::EmptyFeatureSet: return "EmptyFeatureSet";
    case ErrorCode::InsufficientSubjects: return "InsufficientSubjects";
    case ErrorCode::MissingSplit: return "MissingSplit";
    case ErrorCode::MissingLabels: return "MissingLabels";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::Empty: return "Empty";
    case ErrorCode::DivisionByZero: return "DivisionByZero";
  }
  return "Unknown";
}

}  // namespace persona
