#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include "iab/f1ap_message.h"
#include "iab/ids.h"

namespace iab {

struct GtpHeader {
  TunnelKey tunnel;
  std::uint32_t length = 0;  // bytes carried inside this header
  std::uint32_t size = 8;

  friend bool operator==(const GtpHeader&, const GtpHeader&) = default;
};

struct BapHeader {
  std::uint32_t route_id = 0;
  std::uint32_t size = 4;

  friend bool operator==(const BapHeader&, const BapHeader&) = default;
};

using Header = std::variant<GtpHeader, BapHeader>;

std::uint32_t header_size(const Header& h);

inline constexpr std::size_t kMaxHeaderDepth = 2;

struct Packet {
  std::uint64_t id = 0;
  std::uint32_t flow = 0;  // 0 marks control-plane traffic
  std::uint64_t seq = 0;
  std::uint32_t payload_size = 0;
  std::vector<Header> header_stack;  // outermost last
  double created_at = 0.0;
  std::vector<NodeId> hop_log;
  std::uint32_t ttl = 16;
  NodeId src;
  NodeId dst;
  std::optional<F1Message> control;

  std::uint32_t wire_size() const;
  std::uint32_t header_bytes() const;
  std::size_t depth() const { return header_stack.size(); }
  const Header* outer() const {
    return header_stack.empty() ? nullptr : &header_stack.back();
  }
  const GtpHeader* outer_gtp() const;
  const BapHeader* outer_bap() const;
  // TEIDs in stack order (innermost first).
  std::vector<std::uint32_t> teids() const;

  friend bool operator==(const Packet&, const Packet&) = default;
};

// Unidirectional GTP association; key.endpoint is the receiver.
struct Tunnel {
  TunnelId id;
  TunnelKey key;
  NodeId sender;
  std::string purpose;
};

Packet encapsulate(Packet packet, const Tunnel& tunnel,
                   std::uint32_t gtp_header_size = 8);
Packet decapsulate(Packet packet, Teid expected);
Packet push_bap(Packet packet, std::uint32_t route_id,
                std::uint32_t bap_header_size = 4);
Packet pop_bap(Packet packet, std::uint32_t route_id);

// Per-endpoint TEID source: fresh, nonzero, reproducible for a given seed and
// call sequence.
class TeidAllocator {
 public:
  explicit TeidAllocator(std::uint64_t seed) : seed_(seed) {}

  Teid allocate(NodeId endpoint);
  bool issued(NodeId endpoint, Teid teid) const;

 private:
  struct EndpointState {
    std::mt19937_64 rng;
    std::set<std::uint32_t> issued;
  };

  std::uint64_t seed_;
  std::unordered_map<NodeId, EndpointState> endpoints_;
};

enum class PathMode { kUpfReroute, kBapBypass };

std::string_view to_string(PathMode mode);
std::optional<PathMode> parse_path_mode(std::string_view text);

struct Path {
  std::vector<NodeId> hops;
  PathMode mode = PathMode::kUpfReroute;

  Path reversed() const;
  friend bool operator==(const Path&, const Path&) = default;
};

class TunnelRegistry {
 public:
  explicit TunnelRegistry(std::uint64_t seed) : teids_(seed) {}

  Tunnel open(NodeId sender, NodeId receiver, std::string purpose);
  const Tunnel& get(TunnelId id) const;
  const Tunnel* find(const TunnelKey& key) const;
  const std::vector<Tunnel>& all() const { return tunnels_; }

 private:
  TeidAllocator teids_;
  std::vector<Tunnel> tunnels_;
};

}  // namespace iab
