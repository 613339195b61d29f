#include "codedrebal/error.hpp"

namespace codedrebal {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidParameters: return "invalid-parameters";
    case ErrorCode::kUnknownNode: return "unknown-node";
    case ErrorCode::kReplicationOutOfRange: return "replication-out-of-range";
    case ErrorCode::kInvalidLabel: return "invalid-label";
    case ErrorCode::kDirectoryMismatch: return "directory-mismatch";
    case ErrorCode::kNotARecipient: return "not-a-recipient";
    case ErrorCode::kDecodeVerificationFailure:
      return "decode-verification-failure";
    case ErrorCode::kMismatchedParameters: return "mismatched-parameters";
    case ErrorCode::kInvalidProbability: return "invalid-probability";
    case ErrorCode::kOutOfSupport: return "out-of-support";
    case ErrorCode::kProtocolViolation: return "protocol-violation";
    case ErrorCode::kConfigInvalid: return "config-invalid";
    case ErrorCode::kIoFailure: return "io-failure";
  }
  return "unknown-error";
}

}  // namespace codedrebal
