#include "iab/packet.h"

#include <algorithm>

#include <fmt/format.h>

#include "iab/error.h"

namespace iab {

std::string_view to_string(F1MessageKind kind) {
  switch (kind) {
    case F1MessageKind::kSetupRequest: return "F1SetupRequest";
    case F1MessageKind::kSetupResponse: return "F1SetupResponse";
    case F1MessageKind::kUeContextSetupRequest: return "UeContextSetupRequest";
    case F1MessageKind::kUeContextSetupResponse: return "UeContextSetupResponse";
    case F1MessageKind::kDuConfigUpdate: return "DuConfigUpdate";
    case F1MessageKind::kDuConfigUpdateAck: return "DuConfigUpdateAck";
  }
  return "?";
}

std::uint32_t header_size(const Header& h) {
  return std::visit([](const auto& v) { return v.size; }, h);
}

std::uint32_t Packet::header_bytes() const {
  std::uint32_t total = 0;
  for (const Header& h : header_stack) total += header_size(h);
  return total;
}

std::uint32_t Packet::wire_size() const { return payload_size + header_bytes(); }

const GtpHeader* Packet::outer_gtp() const {
  return header_stack.empty() ? nullptr
                              : std::get_if<GtpHeader>(&header_stack.back());
}

const BapHeader* Packet::outer_bap() const {
  return header_stack.empty() ? nullptr
                              : std::get_if<BapHeader>(&header_stack.back());
}

std::vector<std::uint32_t> Packet::teids() const {
  std::vector<std::uint32_t> out;
  for (const Header& h : header_stack) {
    if (const auto* g = std::get_if<GtpHeader>(&h)) out.push_back(g->tunnel.teid.value);
  }
  return out;
}

Packet encapsulate(Packet packet, const Tunnel& tunnel,
                   std::uint32_t gtp_header_size) {
  if (packet.depth() >= kMaxHeaderDepth) {
    throw Error(ErrorCode::kDepthExceeded,
                fmt::format("packet {} already carries {} headers", packet.id,
                            packet.depth()));
  }
  GtpHeader h;
  h.tunnel = tunnel.key;
  h.length = packet.wire_size();
  h.size = gtp_header_size;
  packet.header_stack.emplace_back(h);
  return packet;
}

Packet decapsulate(Packet packet, Teid expected) {
  if (packet.header_stack.empty()) {
    throw Error(ErrorCode::kEmptyStack,
                fmt::format("packet {} has no header to remove", packet.id));
  }
  const GtpHeader* outer = packet.outer_gtp();
  if (!outer) {
    throw Error(ErrorCode::kUnexpectedHeader,
                fmt::format("packet {} outer header is not GTP", packet.id));
  }
  if (outer->tunnel.teid != expected) {
    throw Error(ErrorCode::kTeidMismatch,
                fmt::format("packet {} carries TEID {:#x}, expected {:#x}",
                            packet.id, outer->tunnel.teid.value, expected.value));
  }
  packet.header_stack.pop_back();
  return packet;
}

Packet push_bap(Packet packet, std::uint32_t route_id,
                std::uint32_t bap_header_size) {
  if (packet.depth() >= kMaxHeaderDepth) {
    throw Error(ErrorCode::kDepthExceeded,
                fmt::format("packet {} already carries {} headers", packet.id,
                            packet.depth()));
  }
  packet.header_stack.emplace_back(BapHeader{route_id, bap_header_size});
  return packet;
}

Packet pop_bap(Packet packet, std::uint32_t route_id) {
  if (packet.header_stack.empty()) {
    throw Error(ErrorCode::kEmptyStack,
                fmt::format("packet {} has no header to remove", packet.id));
  }
  const BapHeader* outer = packet.outer_bap();
  if (!outer || outer->route_id != route_id) {
    throw Error(ErrorCode::kUnexpectedHeader,
                fmt::format("packet {} outer header is not BAP route {}",
                            packet.id, route_id));
  }
  packet.header_stack.pop_back();
  return packet;
}

Teid TeidAllocator::allocate(NodeId endpoint) {
  auto it = endpoints_.find(endpoint);
  if (it == endpoints_.end()) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed_),
                      static_cast<std::uint32_t>(seed_ >> 32), endpoint.value};
    it = endpoints_.emplace(endpoint, EndpointState{std::mt19937_64(seq), {}})
             .first;
  }
  EndpointState& state = it->second;
  if (state.issued.size() >= 0xFFFFFFFFull) {
    throw Error(ErrorCode::kExhausted,
                fmt::format("TEID space of node #{}", endpoint.value));
  }
  for (;;) {
    const auto value = static_cast<std::uint32_t>(state.rng());
    if (value != 0 && state.issued.insert(value).second) return Teid{value};
  }
}

bool TeidAllocator::issued(NodeId endpoint, Teid teid) const {
  auto it = endpoints_.find(endpoint);
  return it != endpoints_.end() && it->second.issued.contains(teid.value);
}

Tunnel TunnelRegistry::open(NodeId sender, NodeId receiver,
                            std::string purpose) {
  Tunnel t;
  t.id = TunnelId{static_cast<std::uint32_t>(tunnels_.size() + 1)};
  t.key = TunnelKey{receiver, teids_.allocate(receiver)};
  t.sender = sender;
  t.purpose = std::move(purpose);
  tunnels_.push_back(std::move(t));
  return tunnels_.back();
}

std::string_view to_string(PathMode mode) {
  return mode == PathMode::kUpfReroute ? "upf-reroute" : "bap-bypass";
}

std::optional<PathMode> parse_path_mode(std::string_view text) {
  if (text == "upf-reroute" || text == "UpfReroute" || text == "upf") {
    return PathMode::kUpfReroute;
  }
  if (text == "bap-bypass" || text == "BapBypass" || text == "bap") {
    return PathMode::kBapBypass;
  }
  return std::nullopt;
}

Path Path::reversed() const {
  Path p = *this;
  std::reverse(p.hops.begin(), p.hops.end());
  return p;
}

const Tunnel& TunnelRegistry::get(TunnelId id) const {
  if (!id.valid() || id.value > tunnels_.size()) {
    throw Error(ErrorCode::kInvalidArgument,
                fmt::format("unknown tunnel #{}", id.value));
  }
  return tunnels_[id.value - 1];
}

const Tunnel* TunnelRegistry::find(const TunnelKey& key) const {
  for (const Tunnel& t : tunnels_) {
    if (t.key == key) return &t;
  }
  return nullptr;
}

}  // namespace iab
