#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace odegrow {

enum class ErrorCode {
  NonMonotoneTimes,
  NonPositiveVolume,
  LengthMismatch,
  TooFewPoints,
  DomainError,
  BlowUp,
  Diverged,
  ShapeMismatch,
  TooFewMeasurements,
  EmptyInput,
  NoUsableLesions,
  ParseError,
  InvalidConfig,
  UnknownModel,
  IoError,
};

/// Stable token for an error code, e.g. "TooFewMeasurements".
[[nodiscard]] const char* to_string(ErrorCode code) noexcept;

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  [[nodiscard]] ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Lesion validation failure; `index()` is the offending measurement.
class LesionError : public Error {
 public:
  LesionError(ErrorCode code, std::size_t index, const std::string& message)
      : Error(code, message), index_(index) {}

  [[nodiscard]] std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

/// Cohort file failure; `line()` is 1-based and counts the header.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& message)
      : Error(ErrorCode::ParseError, "line " + std::to_string(line) + ": " + message),
        line_(line) {}

  [[nodiscard]] std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace odegrow
