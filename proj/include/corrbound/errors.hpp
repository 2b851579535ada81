#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace corrbound {

enum class ErrorCode {
  InvalidConfig,
  DegenerateRow,
  EmptySample,
  InsufficientData,
  DegenerateRange,
  TooFewTrajectories,
  EmptyValidationSet,
  OutOfSampleViolation,
  IoError,
  SchemaMismatch,
  InvariantViolation,
};

std::string_view error_code_name(ErrorCode code);

/// Base for every failure raised by the library. The code is stable and
/// machine-readable; the message is for humans.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// A centered row with (numerically) zero norm: the correlation is undefined.
class DegenerateRowError : public Error {
 public:
  explicit DegenerateRowError(std::size_t row);

  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_;
};

}  // namespace corrbound
