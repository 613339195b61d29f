#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace codedrebal {

enum class ErrorCode {
  kInvalidParameters,
  kUnknownNode,
  kReplicationOutOfRange,
  kInvalidLabel,
  kDirectoryMismatch,
  kNotARecipient,
  kDecodeVerificationFailure,
  kMismatchedParameters,
  kInvalidProbability,
  kOutOfSupport,
  kProtocolViolation,
  kConfigInvalid,
  kIoFailure,
};

std::string_view error_code_name(ErrorCode code);

/// Every failure raised by this library carries one of the codes above.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace codedrebal
