#include "iab/routing.h"

#include <algorithm>

#include <fmt/format.h>

#include "iab/error.h"

namespace iab {
namespace {

std::string describe(const Match& m) {
  struct V {
    std::string operator()(const TunnelKey& k) const {
      return fmt::format("teid {:#x}@#{}", k.teid.value, k.endpoint.value);
    }
    std::string operator()(const FlowDestination& d) const {
      return fmt::format("dst #{}", d.node.value);
    }
    std::string operator()(const BapRoute& r) const {
      return fmt::format("bap route {}", r.route_id);
    }
  };
  return std::visit(V{}, m);
}

// Header stack as seen by the installer: GTP keys and BAP ids only.
using ProbeHeader = std::variant<TunnelKey, BapRoute>;

}  // namespace

std::string_view to_string(RouteAction a) {
  switch (a) {
    case RouteAction::kForward: return "forward";
    case RouteAction::kPushGtp: return "push_gtp";
    case RouteAction::kPopGtp: return "pop_gtp";
    case RouteAction::kPushBap: return "push_bap";
    case RouteAction::kPopBap: return "pop_bap";
  }
  return "?";
}

void RoutingTable::check(const RouteEntry& entry) const {
  auto it = entries_.find({entry.at_node, entry.match});
  if (it != entries_.end() && !(it->second == entry)) {
    throw Error(ErrorCode::kConflictingEntry,
                fmt::format("node #{} already routes {} to #{}",
                            entry.at_node.value, describe(entry.match),
                            it->second.next_hop.value));
  }
}

bool RoutingTable::install(const RouteEntry& entry) {
  check(entry);
  return entries_.emplace(std::pair{entry.at_node, entry.match}, entry).second;
}

const RouteEntry* RoutingTable::find(NodeId node, const Match& match) const {
  auto it = entries_.find({node, match});
  return it == entries_.end() ? nullptr : &it->second;
}

const RouteEntry* RoutingTable::lookup(NodeId node, const Packet& packet) const {
  if (const BapHeader* bap = packet.outer_bap()) {
    return find(node, BapRoute{bap->route_id});
  }
  if (const GtpHeader* gtp = packet.outer_gtp()) {
    if (const RouteEntry* e = find(node, gtp->tunnel)) return e;
    if (gtp->tunnel.endpoint == node) return nullptr;
    return find(node, FlowDestination{gtp->tunnel.endpoint});
  }
  return find(node, FlowDestination{packet.dst});
}

std::size_t RoutingTable::remove_if(
    const std::function<bool(const RouteEntry&)>& pred) {
  return std::erase_if(entries_,
                       [&](const auto& kv) { return pred(kv.second); });
}

std::vector<RouteEntry> RoutingTable::entries_at(NodeId node) const {
  std::vector<RouteEntry> out;
  for (const auto& [key, e] : entries_) {
    if (key.first == node) out.push_back(e);
  }
  return out;
}

std::vector<RouteEntry> RoutingTable::all() const {
  std::vector<RouteEntry> out;
  out.reserve(entries_.size());
  for (const auto& [key, e] : entries_) out.push_back(e);
  return out;
}

bool path_connected(const Scenario& scenario, const Path& path) {
  for (std::size_t i = 0; i + 1 < path.hops.size(); ++i) {
    if (!scenario.find_link(path.hops[i], path.hops[i + 1])) return false;
  }
  return true;
}

Path build_f1_transport_path(const Scenario& scenario,
                             const ControlPlane& control, NodeId du,
                             PathMode mode) {
  const Node& d = scenario.node(du);
  const auto cu = scenario.first_of(Role::kCu);
  const auto upf = scenario.first_of(Role::kUpf);
  if (!cu || !upf) {
    throw Error(ErrorCode::kPreconditionViolated, "scenario lacks a CU or UPF");
  }
  if (d.role == Role::kDonorDu) return Path{{du, *cu}, mode};
  if (d.role != Role::kIabDu) {
    throw Error(ErrorCode::kInvalidArgument,
                fmt::format("{} is not a DU", d.name));
  }
  const auto mt = scenario.group_partner(du);
  if (!mt) {
    throw Error(ErrorCode::kPreconditionViolated,
                fmt::format("{} has no IAB-MT", d.name));
  }
  const PduSession* session = control.session(*mt);
  const UeContext* ctx = control.context(*mt);
  if (ctx) {
    const F1Association* donor_f1 = control.association(ctx->serving_du);
    if (!donor_f1 || donor_f1->state != F1State::kActive) {
      throw Error(ErrorCode::kAssociationNotActive,
                  fmt::format("Donor DU {} association is not active",
                              scenario.node(ctx->serving_du).name));
    }
  }
  if (!session || session->state != SessionState::kEstablished || !ctx ||
      ctx->state != UeState::kConnected) {
    throw Error(ErrorCode::kSessionNotEstablished,
                fmt::format("IAB-MT of {} has no established PDU session",
                            d.name));
  }
  const NodeId donor = ctx->serving_du;
  if (mode == PathMode::kUpfReroute) {
    return Path{{du, *mt, donor, *cu, *upf, *cu}, mode};
  }
  return Path{{du, *mt, donor, *cu}, mode};
}

std::vector<RouteEntry> install_routes(RoutingTable& table,
                                       const Scenario& scenario,
                                       const Path& path,
                                       const TransportTunnels& tunnels) {
  const auto& hops = path.hops;
  if (hops.size() < 2) {
    throw Error(ErrorCode::kInvalidArgument, "path needs at least two hops");
  }
  if (!path_connected(scenario, path)) {
    throw Error(ErrorCode::kPreconditionViolated,
                "path uses a link absent from the topology");
  }
  const bool uplink = is_du(scenario.node(hops.front()).role);
  const bool via_iab = std::any_of(hops.begin(), hops.end(), [&](NodeId n) {
    return scenario.node(n).role == Role::kIabMt;
  });
  const NodeId terminus = hops.back();
  const bool reroute = path.mode == PathMode::kUpfReroute;
  if (via_iab && reroute &&
      !(uplink ? tunnels.session_uplink : tunnels.session_downlink)) {
    throw Error(ErrorCode::kSessionNotEstablished,
                "reroute path needs the IAB-MT session tunnels");
  }
  if (via_iab && !reroute &&
      (uplink ? tunnels.bap_uplink_route : tunnels.bap_downlink_route) == 0) {
    throw Error(ErrorCode::kInvalidArgument, "bypass path needs a BAP route id");
  }

  std::vector<ProbeHeader> stack;
  std::vector<RouteEntry> planned;
  for (std::size_t i = 0; i + 1 < hops.size(); ++i) {
    const NodeId node = hops[i];
    const Role role = scenario.node(node).role;
    RouteEntry e;
    e.at_node = node;
    e.next_hop = hops[i + 1];
    if (stack.empty()) {
      e.match = FlowDestination{terminus};
    } else if (const auto* key = std::get_if<TunnelKey>(&stack.back())) {
      e.match = *key;
    } else {
      e.match = std::get<BapRoute>(stack.back());
    }
    if (via_iab && reroute) {
      const TunnelKey session =
          uplink ? *tunnels.session_uplink : *tunnels.session_downlink;
      const Role pusher = uplink ? Role::kIabMt : Role::kUpf;
      const Role popper = uplink ? Role::kUpf : Role::kIabMt;
      const bool outer_is_session =
          !stack.empty() && stack.back() == ProbeHeader{session};
      if (role == pusher && !outer_is_session) {
        e.action = RouteAction::kPushGtp;
        e.push_tunnel = session;
        stack.emplace_back(session);
      } else if (role == popper && outer_is_session) {
        e.action = RouteAction::kPopGtp;
        stack.pop_back();
      }
    } else if (via_iab) {
      const std::uint32_t route =
          uplink ? tunnels.bap_uplink_route : tunnels.bap_downlink_route;
      const bool outer_is_bap =
          !stack.empty() && std::holds_alternative<BapRoute>(stack.back());
      const bool pushes =
          uplink ? role == Role::kIabMt
                 : role == Role::kDonorDu &&
                       scenario.node(e.next_hop).role == Role::kIabMt;
      const Role popper = uplink ? Role::kDonorDu : Role::kIabMt;
      if (pushes && !outer_is_bap) {
        e.action = RouteAction::kPushBap;
        e.push_route = route;
        stack.emplace_back(BapRoute{route});
      } else if (role == popper && outer_is_bap) {
        e.action = RouteAction::kPopBap;
        stack.pop_back();
      }
    }
    planned.push_back(e);
  }
  if (!stack.empty()) {
    throw Error(ErrorCode::kInvalidArgument,
                "path leaves a header on the packet at its terminus");
  }
  for (const RouteEntry& e : planned) table.check(e);
  for (const RouteEntry& e : planned) table.install(e);
  return planned;
}

std::vector<RouteEntry> install_bearer_routes(RoutingTable& table,
                                              const Scenario& scenario,
                                              NodeId ue,
                                              const BearerTunnels& drb,
                                              const Path& downlink_path) {
  const auto upf = scenario.first_of(Role::kUpf);
  if (!upf || downlink_path.hops.size() < 2) {
    throw Error(ErrorCode::kPreconditionViolated,
                "bearer routes need a UPF and a DU path");
  }
  const NodeId cu = downlink_path.hops.front();
  const NodeId du = downlink_path.hops.back();
  std::vector<RouteEntry> planned;
  planned.push_back(RouteEntry{cu, FlowDestination{ue}, downlink_path.hops[1],
                               RouteAction::kPushGtp, drb.downlink, 0});
  planned.push_back(
      RouteEntry{cu, drb.uplink, *upf, RouteAction::kPopGtp, std::nullopt, 0});
  planned.push_back(
      RouteEntry{du, drb.downlink, ue, RouteAction::kPopGtp, std::nullopt, 0});
  for (const RouteEntry& e : planned) table.check(e);
  for (const RouteEntry& e : planned) table.install(e);
  return planned;
}

Forwarded forward(const RoutingTable& table, NodeId node, Packet packet,
                  const EngineConfig& config) {
  const RouteEntry* e = table.lookup(node, packet);
  if (!e) {
    const GtpHeader* gtp = packet.outer_gtp();
    if (gtp && gtp->tunnel.endpoint == node) {
      throw Error(ErrorCode::kTeidMismatch,
                  fmt::format("node #{} has no tunnel with TEID {:#x}",
                              node.value, gtp->tunnel.teid.value));
    }
    throw Error(ErrorCode::kNoRoute,
                fmt::format("node #{} has no route for packet {}", node.value,
                            packet.id));
  }
  if (packet.ttl <= 1) {
    throw Error(ErrorCode::kTtlExpired,
                fmt::format("packet {} expired at node #{}", packet.id,
                            node.value));
  }
  packet.ttl -= 1;
  packet.hop_log.push_back(node);
  switch (e->action) {
    case RouteAction::kForward:
      break;
    case RouteAction::kPushGtp: {
      Tunnel t;
      t.key = *e->push_tunnel;
      packet = encapsulate(std::move(packet), t, config.gtp_header_size);
      break;
    }
    case RouteAction::kPopGtp:
      packet = decapsulate(std::move(packet), std::get<TunnelKey>(e->match).teid);
      break;
    case RouteAction::kPushBap:
      packet = push_bap(std::move(packet), e->push_route, config.bap_header_size);
      break;
    case RouteAction::kPopBap:
      packet = pop_bap(std::move(packet), std::get<BapRoute>(e->match).route_id);
      break;
  }
  return Forwarded{e->next_hop, std::move(packet), e->action};
}

}  // namespace iab
