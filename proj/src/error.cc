#include "iab/error.h"

namespace iab {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kPreconditionViolated: return "PreconditionViolated";
    case ErrorCode::kUnknownNode: return "UnknownNode";
    case ErrorCode::kUnknownLink: return "UnknownLink";
    case ErrorCode::kDuplicateCu: return "DuplicateCu";
    case ErrorCode::kDuplicateUpf: return "DuplicateUpf";
    case ErrorCode::kDuplicateName: return "DuplicateName";
    case ErrorCode::kIllegalMedium: return "IllegalMedium";
    case ErrorCode::kMissingCarrier: return "MissingCarrier";
    case ErrorCode::kNoDonorCoverage: return "NoDonorCoverage";
    case ErrorCode::kTooClose: return "TooClose";
    case ErrorCode::kTransportDown: return "TransportDown";
    case ErrorCode::kNotCovered: return "NotCovered";
    case ErrorCode::kDuNotReady: return "DuNotReady";
    case ErrorCode::kMtDetached: return "MtDetached";
    case ErrorCode::kAlreadyEstablished: return "AlreadyEstablished";
    case ErrorCode::kNotActive: return "NotActive";
    case ErrorCode::kInvalidTransition: return "InvalidTransition";
    case ErrorCode::kExhausted: return "Exhausted";
    case ErrorCode::kDepthExceeded: return "DepthExceeded";
    case ErrorCode::kTeidMismatch: return "TeidMismatch";
    case ErrorCode::kEmptyStack: return "EmptyStack";
    case ErrorCode::kUnexpectedHeader: return "UnexpectedHeader";
    case ErrorCode::kSessionNotEstablished: return "SessionNotEstablished";
    case ErrorCode::kAssociationNotActive: return "AssociationNotActive";
    case ErrorCode::kConflictingEntry: return "ConflictingEntry";
    case ErrorCode::kNoRoute: return "NoRoute";
    case ErrorCode::kTtlExpired: return "TtlExpired";
    case ErrorCode::kQueueOverflow: return "QueueOverflow";
    case ErrorCode::kLinkDown: return "LinkDown";
    case ErrorCode::kUeNotConnected: return "UeNotConnected";
    case ErrorCode::kScenarioInvalid: return "ScenarioInvalid";
    case ErrorCode::kUnknownFlow: return "UnknownFlow";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kSchemaMismatch: return "SchemaMismatch";
    case ErrorCode::kIoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace iab
