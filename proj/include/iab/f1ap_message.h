#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "iab/ids.h"
#include "iab/topology.h"

namespace iab {

enum class F1MessageKind {
  kSetupRequest,
  kSetupResponse,
  kUeContextSetupRequest,
  kUeContextSetupResponse,
  kDuConfigUpdate,
  kDuConfigUpdateAck,
};

std::string_view to_string(F1MessageKind kind);

// Structured F1AP record. It travels as a fixed-size control payload; there is
// no ASN.1 encoding.
struct F1Message {
  F1MessageKind kind = F1MessageKind::kSetupRequest;
  NodeId du;  // the association is keyed by its DU
  std::uint64_t transaction = 0;
  std::optional<Carrier> cell;
  std::optional<NodeId> ue;
  std::optional<TunnelKey> tunnel;
  std::string cause;

  friend bool operator==(const F1Message&, const F1Message&) = default;
};

}  // namespace iab
