#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace iab {

enum class ErrorCode {
  kInvalidArgument,
  kPreconditionViolated,
  kUnknownNode,
  kUnknownLink,
  kDuplicateCu,
  kDuplicateUpf,
  kDuplicateName,
  kIllegalMedium,
  kMissingCarrier,
  kNoDonorCoverage,
  kTooClose,
  kTransportDown,
  kNotCovered,
  kDuNotReady,
  kMtDetached,
  kAlreadyEstablished,
  kNotActive,
  kInvalidTransition,
  kExhausted,
  kDepthExceeded,
  kTeidMismatch,
  kEmptyStack,
  kUnexpectedHeader,
  kSessionNotEstablished,
  kAssociationNotActive,
  kConflictingEntry,
  kNoRoute,
  kTtlExpired,
  kQueueOverflow,
  kLinkDown,
  kUeNotConnected,
  kScenarioInvalid,
  kUnknownFlow,
  kParseError,
  kSchemaMismatch,
  kIoError,
};

std::string_view to_string(ErrorCode code);

// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace iab
