#pragma once

#include <stdexcept>
#include <string>

namespace hybseq {

enum class ErrorCode {
  InvalidBase,
  EmptySequence,
  BadLength,
  TooLong,
  TooShort,
  TooLarge,
  TooFew,
  NoConvergence,
  OracleFailure,
  IoError,
  ParseError,
  EmptyMask,
  SingularCovariance,
  OneClassOnly,
  LengthMismatch,
  ShapeMismatch,
  NonFiniteValue,
  NonFiniteGradient,
  KTooLarge,
  UsageError,
  InvalidArgument,
};

const char* error_code_name(ErrorCode code);

/// Single exception type for the whole library; `code()` carries the
/// machine-checkable category, `what()` the human diagnostic.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace hybseq
