#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ffext {

enum class ErrorCode {
  NotPrime,
  EvenCharacteristic,
  CapExceeded,
  InvalidArgument,
  ZeroInverse,
  SpaceMismatch,
  BadExponent,
  ParseError,
  DegreeExceedsCharacteristic,
  ZeroPolynomial,
  FieldMismatch,
  EmptyVariety,
  SupportViolation,
  ZeroFunction,
  BadRange,
  WrongPolynomial,
  ZeroFrequency,
  NonDiagonalPolynomial,
  WrongResidueClass,
  ZeroRadius,
  BadSizes,
  EmptySet,
};

std::string_view to_string(ErrorCode code) noexcept;

// Every library failure is reported through this type; the code is stable and
// is what the CLI and the Python bindings dispatch on.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// ParseError carrying the 0-based character offset of the offending token.
class ParseError : public Error {
 public:
  ParseError(std::size_t position, const std::string& detail)
      : Error(ErrorCode::ParseError, "at position " + std::to_string(position) + ": " + detail),
        position_(position) {}

  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

}  // namespace ffext
