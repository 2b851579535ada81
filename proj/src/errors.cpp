#include "corrbound/errors.hpp"

namespace corrbound {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::DegenerateRow: return "DegenerateRow";
    case ErrorCode::EmptySample: return "EmptySample";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::DegenerateRange: return "DegenerateRange";
    case ErrorCode::TooFewTrajectories: return "TooFewTrajectories";
    case ErrorCode::EmptyValidationSet: return "EmptyValidationSet";
    case ErrorCode::OutOfSampleViolation: return "OutOfSampleViolation";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::SchemaMismatch: return "SchemaMismatch";
    case ErrorCode::InvariantViolation: return "InvariantViolation";
  }
  return "Unknown";
}

DegenerateRowError::DegenerateRowError(std::size_t row)
    : Error(ErrorCode::DegenerateRow,
            "centered row " + std::to_string(row) + " has vanishing norm"),
      row_(row) {}

}  // namespace corrbound
