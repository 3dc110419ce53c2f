#pragma once

#include <compare>
#include <functional>
#include <map>
#include <optional>
#include <utility>
#include <variant>
#include <vector>

#include "iab/f1ap.h"
#include "iab/packet.h"
#include "iab/topology.h"

namespace iab {

struct FlowDestination {
  NodeId node;
  friend constexpr auto operator<=>(FlowDestination, FlowDestination) = default;
};

struct BapRoute {
  std::uint32_t route_id = 0;
  friend constexpr auto operator<=>(BapRoute, BapRoute) = default;
};

// What a route entry keys on: the outer GTP tunnel, the packet's current
// destination, or the outer BAP routing id.
using Match = std::variant<TunnelKey, FlowDestination, BapRoute>;

enum class RouteAction { kForward, kPushGtp, kPopGtp, kPushBap, kPopBap };

std::string_view to_string(RouteAction a);

struct RouteEntry {
  NodeId at_node;
  Match match;
  NodeId next_hop;
  RouteAction action = RouteAction::kForward;
  std::optional<TunnelKey> push_tunnel;  // kPushGtp
  std::uint32_t push_route = 0;          // kPushBap

  friend bool operator==(const RouteEntry&, const RouteEntry&) = default;
};

class RoutingTable {
 public:
  // Installing an identical entry is a no-op (returns false). A different
  // entry for an existing (node, match) throws ConflictingEntry.
  bool install(const RouteEntry& entry);
  // Checks without installing.
  void check(const RouteEntry& entry) const;

  const RouteEntry* find(NodeId node, const Match& match) const;

  // Outer BAP -> BapRoute; outer GTP -> its TunnelKey, falling back to the
  // tunnel endpoint as destination; bare packet -> its destination.
  const RouteEntry* lookup(NodeId node, const Packet& packet) const;

  std::size_t remove_if(const std::function<bool(const RouteEntry&)>& pred);
  std::vector<RouteEntry> entries_at(NodeId node) const;
  std::vector<RouteEntry> all() const;
  std::size_t size() const { return entries_.size(); }

 private:
  std::map<std::pair<NodeId, Match>, RouteEntry> entries_;
};

// Session tunnels (UPF reroute) or BAP routing ids (bypass) of one IAB node.
struct TransportTunnels {
  std::optional<TunnelKey> session_uplink;
  std::optional<TunnelKey> session_downlink;
  std::uint32_t bap_uplink_route = 0;
  std::uint32_t bap_downlink_route = 0;
};

// Uplink F1 transport path from `du` to the CU. A Donor DU reaches the CU
// directly; a DU node goes through its IAB-MT and, in reroute mode, through
// the UPF and back.
Path build_f1_transport_path(const Scenario& scenario,
                             const ControlPlane& control, NodeId du,
                             PathMode mode);

bool path_connected(const Scenario& scenario, const Path& path);

// Installs one entry per hop (except the last) so that a packet handled at
// hop i is sent to hop i+1, with the header pushes/pops the mode requires.
// Direction is inferred from the first hop (DU first means uplink).
std::vector<RouteEntry> install_routes(RoutingTable& table,
                                       const Scenario& scenario,
                                       const Path& path,
                                       const TransportTunnels& tunnels);

// Per-UE F1-U bearer entries at the CU and serving DU. `downlink_path` is the
// serving DU's F1 path in the CU-to-DU direction.
std::vector<RouteEntry> install_bearer_routes(RoutingTable& table,
                                              const Scenario& scenario,
                                              NodeId ue,
                                              const BearerTunnels& drb,
                                              const Path& downlink_path);

struct Forwarded {
  NodeId next_hop;
  Packet packet;
  RouteAction action = RouteAction::kForward;
};

inline bool is_terminus(NodeId node, const Packet& p) {
  return p.header_stack.empty() && p.dst == node;
}

// One hop of forwarding: logs the node, spends one TTL unit and applies the
// matching entry's header action. Throws NoRoute, TeidMismatch or TtlExpired.
Forwarded forward(const RoutingTable& table, NodeId node, Packet packet,
                  const EngineConfig& config);

}  // namespace iab
