#include "iab/simulator.h"

#include <algorithm>
#include <cmath>
#include <utility>

#include <fmt/format.h>

#include "iab/error.h"
#include "iab/radio.h"

namespace iab {
namespace {

// Floor for the F1 setup retry timer on zero-latency paths.
constexpr double kMinSetupTimer = 1e-6;

bool traverses(const Path& path, NodeId a, NodeId b) {
  for (std::size_t i = 0; i + 1 < path.hops.size(); ++i) {
    const NodeId x = path.hops[i];
    const NodeId y = path.hops[i + 1];
    if ((x == a && y == b) || (x == b && y == a)) return true;
  }
  return false;
}

std::string carrier_text(const Carrier& c) {
  return fmt::format("{} {:.3f} GHz {:g} MHz scs {:g} kHz", c.band_label,
                     c.center_frequency / 1e9, c.bandwidth / 1e6, c.scs / 1e3);
}

}  // namespace

Simulator::Simulator(Scenario scenario, RunOptions options)
    : scenario_(std::move(scenario)),
      options_(options),
      mode_(options.mode.value_or(PathMode::kUpfReroute)),
      seed_(options.seed.value_or(scenario_.seed)),
      tunnels_(seed_) {
  const ValidationReport report = validate_topology(scenario_);
  if (!report.ok()) {
    std::string msg;
    for (const Violation& v : report.violations) {
      if (!msg.empty()) msg += "; ";
      msg += fmt::format("{}: {}", v.code, v.message);
    }
    throw Error(ErrorCode::kScenarioInvalid, msg);
  }
  trace_.scenario = scenario_.name;
  trace_.seed = seed_;
  trace_.mode = mode_;
  trace_.duration = scenario_.duration;
  for (const FlowSpec& f : scenario_.flows) {
    trace_.flows.push_back(
        FlowRecord{f.id, f.src, f.dst, f.rate, f.packet_size, f.start, f.stop});
  }
  flow_stats_.resize(scenario_.flows.size());
  propagating_.resize(scenario_.flows.size());

  control_.set_observer([this](const Transition& tr) {
    TraceEvent e;
    e.time = tr.time;
    e.kind = TraceKind::kTransition;
    e.node = tr.subject;
    e.entity = std::string(to_string(tr.entity));
    e.from = tr.from;
    e.to = tr.to;
    e.code = tr.cause;
    record(std::move(e));
  });
  if (options_.auto_start) start();
}

void Simulator::schedule(double t, EventKind kind, std::function<void()> action) {
  if (t < now_) {
    throw Error(ErrorCode::kInvalidArgument,
                fmt::format("event at {} scheduled in the past (now {})", t, now_));
  }
  events_.push(Event{t, next_seq_++, kind, std::move(action)});
}

void Simulator::start() {
  schedule(0.0, EventKind::kProcedure, [this] {
    for (NodeId du : scenario_.all_of(Role::kDonorDu)) {
      try {
        f1_setup(du);
      } catch (const Error& e) {
        drop_error(du, e);
      }
    }
  });
  for (std::size_t i = 0; i < scenario_.flows.size(); ++i) {
    const FlowSpec& f = scenario_.flows[i];
    if (f.start < scenario_.duration) {
      schedule(f.start, EventKind::kFlowTick,
               [this, i] { flow_tick(static_cast<int>(i), 0); });
    }
  }
  for (const Directive& d : scenario_.schedule) {
    const double at = directive_time(d);
    if (at >= 0 && at < scenario_.duration) {
      schedule(at, EventKind::kDirective, [this, d] { apply_directive(d); });
    }
  }
}

void Simulator::run() { run_until(scenario_.duration); }

void Simulator::run_until(double t) {
  while (!events_.empty()) {
    const Event& top = events_.top();
    if (top.time > t || top.time >= scenario_.duration) break;
    Event ev = std::move(const_cast<Event&>(top));
    events_.pop();
    now_ = ev.time;
    ev.action();
  }
  now_ = std::max(now_, std::min(t, scenario_.duration));
}

// ---------------------------------------------------------------------------
// Trace helpers

void Simulator::record(TraceEvent e) { trace_.events.push_back(std::move(e)); }

void Simulator::record_packet(TraceKind kind, NodeId node, LinkId link,
                              const Packet& p, std::string code) {
  TraceEvent e;
  e.time = now_;
  e.kind = kind;
  e.node = node;
  e.link = link;
  e.flow = flow_of(p);
  e.packet = p.id;
  e.payload = p.payload_size;
  e.wire = p.wire_size();
  e.depth = static_cast<std::uint32_t>(p.depth());
  e.teids = p.teids();
  e.code = std::move(code);
  if (p.control) {
    e.subject = p.control->du;
    if (e.code.empty()) e.code = std::string(to_string(p.control->kind));
  }
  record(std::move(e));
}

void Simulator::drop(NodeId node, LinkId link, const Packet& p, ErrorCode code,
                     std::string detail) {
  record_packet(TraceKind::kDrop, node, link, p, std::string(to_string(code)));
  trace_.events.back().detail = std::move(detail);
  const int flow = flow_of(p);
  if (flow >= 0) flow_stats_[flow].dropped++;
}

void Simulator::drop_error(NodeId node, const Error& err) {
  TraceEvent e;
  e.time = now_;
  e.kind = TraceKind::kDrop;
  e.node = node;
  e.code = std::string(to_string(err.code()));
  e.detail = err.what();
  record(std::move(e));
}

// ---------------------------------------------------------------------------
// Packets and links

Packet Simulator::make_packet(NodeId src, NodeId dst, std::uint32_t payload) {
  Packet p;
  p.id = next_packet_++;
  p.payload_size = payload;
  p.created_at = now_;
  p.ttl = scenario_.engine.ttl;
  p.src = src;
  p.dst = dst;
  return p;
}

bool Simulator::backhaul(const Link& link) const {
  const Role ra = scenario_.node(link.a).role;
  const Role rb = scenario_.node(link.b).role;
  if (ra == Role::kUe || rb == Role::kUe) return false;
  const bool internal = (ra == Role::kIabMt && rb == Role::kIabDu) ||
                        (ra == Role::kIabDu && rb == Role::kIabMt);
  return !internal;
}

LinkDirection& Simulator::direction_state(const Link& link, int dir) {
  auto [it, fresh] = queues_.try_emplace({link.id, dir});
  if (fresh) {
    it->second.from = dir == 0 ? link.a : link.b;
    it->second.to = dir == 0 ? link.b : link.a;
    it->second.backhaul = backhaul(link);
  }
  return it->second;
}

const LinkDirection* Simulator::link_direction(LinkId link, NodeId from) const {
  for (int dir : {0, 1}) {
    auto it = queues_.find({link, dir});
    if (it != queues_.end() && it->second.from == from) return &it->second;
  }
  return nullptr;
}

bool Simulator::transmit(LinkId link_id, NodeId from, Packet packet) {
  const Link* link = scenario_.find_link(link_id);
  if (!link) {
    drop(from, link_id, packet, ErrorCode::kLinkDown);
    return false;
  }
  if (link->a != from && link->b != from) {
    throw Error(ErrorCode::kInvalidArgument,
                fmt::format("node #{} is not an endpoint of link #{}",
                            from.value, link_id.value));
  }
  const int dir = from == link->a ? 0 : 1;
  LinkDirection& q = direction_state(*link, dir);
  auto& lane = packet.control ? q.control : q.user;
  if (lane.size() >= scenario_.engine.queue_capacity) {
    drop(from, link_id, packet, ErrorCode::kQueueOverflow);
    return false;
  }
  record_packet(TraceKind::kForward, from, link_id, packet);
  lane.push_back(std::move(packet));
  try_start_service(link_id, dir);
  return true;
}

void Simulator::try_start_service(LinkId link_id, int dir) {
  const Link* link = scenario_.find_link(link_id);
  if (!link) return;
  LinkDirection& q = direction_state(*link, dir);
  while (!q.busy && (!q.control.empty() || !q.user.empty())) {
    const bool ctl = !q.control.empty();
    auto& lane = ctl ? q.control : q.user;
    const Packet& p = lane.front();
    const double cap =
        link_capacity(scenario_, *link, direction_of(scenario_, *link, q.from));
    if (!(cap > 0)) {
      Packet dead = std::move(lane.front());
      lane.pop_front();
      drop(q.from, link_id, dead, ErrorCode::kLinkDown, "link has no capacity");
      continue;
    }
    const double tx = std::isinf(cap) ? 0.0 : 8.0 * p.wire_size() / cap;
    q.busy = true;
    q.serving_control = ctl;
    q.packets++;
    q.bytes += p.wire_size();
    q.header_bytes += p.header_bytes();
    q.max_depth = std::max<std::uint32_t>(q.max_depth, p.depth());
    q.busy_time += tx;
    const int flow = flow_of(p);
    if (q.backhaul && flow >= 0) flow_stats_[flow].overhead += p.header_bytes();
    schedule(now_ + tx, EventKind::kDeparture,
             [this, link_id, dir] { on_departure(link_id, dir); });
  }
}

void Simulator::on_departure(LinkId link_id, int dir) {
  auto it = queues_.find({link_id, dir});
  if (it == queues_.end() || it->second.removed) return;
  LinkDirection& q = it->second;
  auto& lane = q.serving_control ? q.control : q.user;
  Packet p = std::move(lane.front());
  lane.pop_front();
  q.busy = false;
  const Link* link = scenario_.find_link(link_id);
  const double prop = link ? link->propagation_delay : 0.0;
  const NodeId to = q.to;
  const int flow = flow_of(p);
  if (flow >= 0) propagating_[flow]++;
  schedule(now_ + prop, EventKind::kArrival,
           [this, to, link_id, flow, p = std::move(p)]() mutable {
             if (flow >= 0) propagating_[flow]--;
             on_arrival(to, link_id, std::move(p));
           });
  try_start_service(link_id, dir);
}

std::uint64_t Simulator::in_flight(int flow) const {
  std::uint64_t n = propagating_.at(flow);
  for (const auto& [key, q] : queues_) {
    for (const Packet& p : q.user) {
      if (flow_of(p) == flow) ++n;
    }
  }
  return n;
}

void Simulator::route_from(NodeId node, Packet packet) {
  Forwarded fw;
  try {
    fw = forward(routes_, node, packet, scenario_.engine);
  } catch (const Error& e) {
    drop(node, LinkId{}, packet, e.code(), e.what());
    return;
  }
  const Link* link = scenario_.find_link(node, fw.next_hop);
  if (!link) {
    drop(node, LinkId{}, fw.packet, ErrorCode::kLinkDown,
         fmt::format("no link to #{}", fw.next_hop.value));
    return;
  }
  transmit(link->id, node, std::move(fw.packet));
}

void Simulator::on_arrival(NodeId node, LinkId via, Packet packet) {
  if (is_terminus(node, packet)) {
    if (packet.control) {
      on_control(node, packet);
      return;
    }
    record_packet(TraceKind::kDeliver, node, via, packet);
    TraceEvent& e = trace_.events.back();
    e.hop_log = packet.hop_log;
    e.latency = now_ - packet.created_at;
    const int flow = flow_of(packet);
    if (flow >= 0) {
      FlowStats& s = flow_stats_[flow];
      s.delivered++;
      s.hops += packet.hop_log.size();
      s.payload_bytes += packet.payload_size;
      s.latency_sum += e.latency;
    }
    return;
  }
  const Node& n = scenario_.node(node);
  // Uplink user packet entering the RAN: wrap it in the UE's F1-U tunnel.
  if (is_du(n.role) && !packet.control && packet.header_stack.empty() &&
      scenario_.has_node(packet.src) &&
      scenario_.node(packet.src).role == Role::kUe) {
    const UeContext* ctx = control_.context(packet.src);
    if (!ctx || ctx->state != UeState::kConnected || !ctx->drb ||
        ctx->serving_du != node) {
      drop(node, via, packet, ErrorCode::kUeNotConnected);
      return;
    }
    Tunnel t;
    t.key = ctx->drb->uplink;
    try {
      packet = encapsulate(std::move(packet), t, scenario_.engine.gtp_header_size);
    } catch (const Error& e) {
      drop(node, via, packet, e.code(), e.what());
      return;
    }
  }
  route_from(node, std::move(packet));
}

// ---------------------------------------------------------------------------
// Control plane

void Simulator::send_control(NodeId from, NodeId to, F1Message msg) {
  Packet p = make_packet(from, to, scenario_.engine.control_message_size);
  p.control = std::move(msg);
  route_from(from, std::move(p));
}

void Simulator::on_control(NodeId node, const Packet& packet) {
  const F1Message& msg = *packet.control;
  if (!control_.deliverable(msg)) {
    drop(node, LinkId{}, packet, ErrorCode::kAssociationNotActive,
         fmt::format("{} on a non-active association",
                     to_string(msg.kind)));
    return;
  }
  Packet consumed = packet;
  consumed.hop_log.push_back(node);
  record_packet(TraceKind::kDeliver, node, LinkId{}, consumed);
  {
    TraceEvent& e = trace_.events.back();
    e.hop_log = consumed.hop_log;
    e.latency = now_ - packet.created_at;
    e.entity = std::string(to_string(EntityKind::kF1Association));
    e.to = std::string(to_string(control_.association(msg.du)->state));
  }

  const NodeId du = msg.du;
  const F1Association* a = control_.association(du);
  try {
    switch (msg.kind) {
      case F1MessageKind::kSetupRequest:
        if (a->state == F1State::kSetupRequested) {
          F1Message rsp;
          rsp.kind = F1MessageKind::kSetupResponse;
          rsp.du = du;
          rsp.transaction = msg.transaction;
          send_control(node, du, rsp);
        }
        break;
      case F1MessageKind::kSetupResponse:
        if (a->state == F1State::kSetupRequested) {
          control_.complete_setup(du, now_);
          reevaluate_access();
        }
        break;
      case F1MessageKind::kUeContextSetupRequest: {
        const UeContext* ctx = control_.context(*msg.ue);
        if (!ctx || ctx->state != UeState::kAttaching || ctx->serving_du != du) {
          break;
        }
        const Tunnel dl = tunnels_.open(a->cu, du, "f1u-dl");
        F1Message rsp;
        rsp.kind = F1MessageKind::kUeContextSetupResponse;
        rsp.du = du;
        rsp.transaction = msg.transaction;
        rsp.ue = msg.ue;
        rsp.tunnel = dl.key;
        send_control(node, a->cu, rsp);
        break;
      }
      case F1MessageKind::kUeContextSetupResponse: {
        const NodeId ue = *msg.ue;
        const UeContext* ctx = control_.context(ue);
        if (!ctx || ctx->state != UeState::kAttaching || ctx->serving_du != du) {
          break;
        }
        const BearerTunnels drb{pending_uplink_.at(ue), *msg.tunnel};
        pending_uplink_.erase(ue);
        if (!scenario_.find_link(ue, du)) {
          LinkSpec spec;
          spec.medium = Medium::kRadio;
          spec.carrier = scenario_.node(du).carrier;
          add_link(scenario_, du, ue, spec);
        }
        const auto path = transport_path(du);
        install_bearer_routes(routes_, scenario_, ue, drb, path->reversed());
        bearers_[ue] = drb;
        control_.complete_attach(ue, drb, now_);
        on_terminal_connected(ue);
        break;
      }
      case F1MessageKind::kDuConfigUpdate: {
        F1Message ack;
        ack.kind = F1MessageKind::kDuConfigUpdateAck;
        ack.du = du;
        ack.transaction = msg.transaction;
        ack.cell = msg.cell;
        send_control(node, du, ack);
        break;
      }
      case F1MessageKind::kDuConfigUpdateAck:
        apply_carrier(du, *msg.cell);
        reevaluate_access();
        break;
    }
  } catch (const Error& e) {
    drop_error(node, e);
  }
}

std::optional<Path> Simulator::transport_path(NodeId du) const {
  const F1Association* a = control_.association(du);
  if (!a) return std::nullopt;
  return a->transport;
}

double Simulator::control_rtt(const Path& path) const {
  const double bits = 8.0 * scenario_.engine.control_message_size;
  double rtt = 0.0;
  for (const Path& leg : {path, path.reversed()}) {
    for (std::size_t i = 0; i + 1 < leg.hops.size(); ++i) {
      const Link* link = scenario_.find_link(leg.hops[i], leg.hops[i + 1]);
      if (!link) continue;
      const double cap = link_capacity(
          scenario_, *link, direction_of(scenario_, *link, leg.hops[i]));
      if (cap > 0 && std::isfinite(cap)) rtt += bits / cap;
      rtt += link->propagation_delay;
    }
  }
  return rtt;
}

void Simulator::install_du_routes(NodeId du) {
  const Path path = build_f1_transport_path(scenario_, control_, du, mode_);
  const TransportTunnels tt =
      transport_.count(du) ? transport_.at(du) : TransportTunnels{};
  auto& mine = du_routes_[du];
  for (const Path& p : {path, path.reversed()}) {
    for (RouteEntry& e : install_routes(routes_, scenario_, p, tt)) {
      mine.push_back(std::move(e));
    }
  }
}

void Simulator::remove_du_routes(NodeId du) {
  auto it = du_routes_.find(du);
  if (it == du_routes_.end()) return;
  const std::vector<RouteEntry> gone = std::move(it->second);
  du_routes_.erase(it);
  routes_.remove_if([&](const RouteEntry& e) {
    if (std::find(gone.begin(), gone.end(), e) == gone.end()) return false;
    // entries shared with another DU's transport stay
    for (const auto& [other, list] : du_routes_) {
      if (std::find(list.begin(), list.end(), e) != list.end()) return false;
    }
    return true;
  });
}

void Simulator::f1_setup(NodeId du) {
  const Node& n = scenario_.node(du);
  if (!is_du(n.role)) {
    throw Error(ErrorCode::kInvalidArgument, fmt::format("{} is not a DU", n.name));
  }
  const NodeId cu = *scenario_.first_of(Role::kCu);
  // Released is terminal; only a fresh or failed association can start over.
  if (const F1Association* a = control_.association(du);
      a && a->state != F1State::kIdle) {
    throw Error(ErrorCode::kPreconditionViolated,
                fmt::format("{} association is {}", n.name, to_string(a->state)));
  }
  const Path path = build_f1_transport_path(scenario_, control_, du, mode_);
  if (!path_connected(scenario_, path)) {
    throw Error(ErrorCode::kTransportDown,
                fmt::format("F1 path of {} uses a missing link", n.name));
  }
  install_du_routes(du);
  control_.begin_setup(cu, du, path, now_);
  send_setup_request(du);
  const double wait = std::max(3.0 * control_rtt(path), kMinSetupTimer);
  schedule(now_ + wait, EventKind::kTimerExpiry,
           [this, du] { on_setup_timer(du, 1); });
}

void Simulator::send_setup_request(NodeId du) {
  F1Message req;
  req.kind = F1MessageKind::kSetupRequest;
  req.du = du;
  req.transaction = next_transaction_++;
  req.cell = scenario_.node(du).carrier;
  send_control(du, control_.association(du)->cu, req);
}

void Simulator::on_setup_timer(NodeId du, int attempt) {
  const F1Association* a = control_.association(du);
  if (!a || a->state != F1State::kSetupRequested) return;
  TraceEvent e;
  e.time = now_;
  e.kind = TraceKind::kTimer;
  e.node = du;
  e.code = "f1_setup_timeout";
  e.detail = fmt::format("attempt {}", attempt);
  record(std::move(e));
  if (!path_connected(scenario_, a->transport)) {
    control_.fail_setup(du, now_, "TransportDown");
    remove_du_routes(du);
    return;
  }
  if (attempt >= 2) {
    control_.fail_setup(du, now_, "F1SetupTimeout");
    remove_du_routes(du);
    return;
  }
  send_setup_request(du);
  const double wait = std::max(3.0 * control_rtt(a->transport), kMinSetupTimer);
  schedule(now_ + wait, EventKind::kTimerExpiry,
           [this, du, attempt] { on_setup_timer(du, attempt + 1); });
}

void Simulator::ue_attach(NodeId ue, NodeId du) {
  const Node& u = scenario_.node(ue);
  const Node& d = scenario_.node(du);
  if (!is_terminal(u.role)) {
    throw Error(ErrorCode::kInvalidArgument,
                fmt::format("{} is not a UE or IAB-MT", u.name));
  }
  if (!is_du(d.role)) {
    throw Error(ErrorCode::kInvalidArgument, fmt::format("{} is not a DU", d.name));
  }
  if (u.role == Role::kIabMt && d.role != Role::kDonorDu) {
    throw Error(ErrorCode::kIllegalMedium,
                fmt::format("IAB-MT {} may only attach to a Donor DU", u.name));
  }
  const NodeId cu = *scenario_.first_of(Role::kCu);
  control_.begin_attach(ue, du, cu, is_covered(scenario_, ue, du), now_);
  const Tunnel ul = tunnels_.open(du, cu, "f1u-ul");
  pending_uplink_[ue] = ul.key;
  F1Message req;
  req.kind = F1MessageKind::kUeContextSetupRequest;
  req.du = du;
  req.transaction = next_transaction_++;
  req.ue = ue;
  req.tunnel = ul.key;
  send_control(cu, du, req);
}

void Simulator::establish_pdu_session(NodeId mt) {
  control_.check_session_allowed(scenario_, mt);
  const NodeId upf = *scenario_.first_of(Role::kUpf);
  const Tunnel ul = tunnels_.open(mt, upf, "session-ul");
  const Tunnel dl = tunnels_.open(upf, mt, "session-dl");
  control_.establish_session(scenario_, mt, upf, ul.key, dl.key, now_);
  const auto du = scenario_.group_partner(mt);
  if (!du) return;
  TransportTunnels tt;
  tt.session_uplink = ul.key;
  tt.session_downlink = dl.key;
  tt.bap_uplink_route = next_bap_route_++;
  tt.bap_downlink_route = next_bap_route_++;
  transport_[*du] = tt;
  f1_setup(*du);
}

void Simulator::on_terminal_connected(NodeId terminal) {
  if (scenario_.node(terminal).role == Role::kIabMt) {
    establish_pdu_session(terminal);
  }
}

void Simulator::remove_bearer_routes(NodeId ue) {
  auto it = bearers_.find(ue);
  if (it == bearers_.end()) return;
  const Match by_dst = FlowDestination{ue};
  const Match ul = it->second.uplink;
  const Match dl = it->second.downlink;
  routes_.remove_if([&](const RouteEntry& e) {
    return e.match == by_dst || e.match == ul || e.match == dl;
  });
  bearers_.erase(it);
}

void Simulator::on_terminal_detached(NodeId terminal, std::string_view cause) {
  remove_bearer_routes(terminal);
  pending_uplink_.erase(terminal);
  if (scenario_.node(terminal).role != Role::kIabMt) return;
  control_.release_session(terminal, now_, cause);
  if (const auto du = scenario_.group_partner(terminal)) {
    const F1Association* a = control_.association(*du);
    if (a && a->state == F1State::kActive) {
      release_association(*du, cause);
    } else if (a && a->state == F1State::kSetupRequested) {
      control_.fail_setup(*du, now_, cause);
      remove_du_routes(*du);
    }
  }
}

void Simulator::release_association(NodeId du, std::string_view cause) {
  for (NodeId ue : control_.release(du, now_, cause)) {
    on_terminal_detached(ue, cause);
  }
  remove_du_routes(du);
}

void Simulator::release(NodeId du) {
  const F1Association* a = control_.association(du);
  if (!a || a->state != F1State::kActive) {
    throw Error(ErrorCode::kNotActive,
                fmt::format("DU #{} association is not active", du.value));
  }
  release_association(du, "F1Release");
}

void Simulator::du_config_update(NodeId du, const Carrier& carrier) {
  const auto bad = carrier.violations();
  if (!bad.empty()) throw Error(ErrorCode::kInvalidArgument, bad.front());
  control_.check_config_update(du);
  F1Message msg;
  msg.kind = F1MessageKind::kDuConfigUpdate;
  msg.du = du;
  msg.transaction = next_transaction_++;
  msg.cell = carrier;
  send_control(du, control_.association(du)->cu, msg);
}

void Simulator::apply_carrier(NodeId du, const Carrier& carrier) {
  Node& n = scenario_.node(du);
  const bool changed = !n.carrier || !(*n.carrier == carrier);
  n.carrier = carrier;
  std::vector<LinkId> radio;
  for (const Link& l : scenario_.links()) {
    if (l.medium == Medium::kRadio && (l.a == du || l.b == du)) radio.push_back(l.id);
  }
  for (LinkId id : radio) scenario_.find_link(id)->carrier = carrier;
  if (!changed) return;
  TraceEvent e;
  e.time = now_;
  e.kind = TraceKind::kCarrier;
  e.node = du;
  e.detail = carrier_text(carrier);
  record(std::move(e));
}

void Simulator::reevaluate_access() {
  std::vector<NodeId> terminals;
  for (const Node& n : scenario_.nodes()) {
    if (is_terminal(n.role)) terminals.push_back(n.id);
  }
  for (NodeId t : terminals) {
    const UeContext* ctx = control_.context(t);
    if (ctx && ctx->state != UeState::kDetached) continue;
    const Role role = scenario_.node(t).role;
    const auto du = best_covering_du(scenario_, t, [&](const Node& d) {
      const F1Association* a = control_.association(d.id);
      return a && a->state == F1State::kActive &&
             (role != Role::kIabMt || d.role == Role::kDonorDu);
    });
    if (!du) continue;
    try {
      ue_attach(t, *du);
    } catch (const Error& e) {
      drop_error(t, e);
    }
  }
}

// ---------------------------------------------------------------------------
// Directives

void Simulator::apply_directive(const Directive& directive) {
  TraceEvent e;
  e.time = now_;
  e.kind = TraceKind::kDirective;
  e.code = std::string(directive_name(directive));
  std::visit(
      [&](const auto& d) {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, InstantiateIabNode>) {
          e.detail = fmt::format("group {} at ({}, {})", d.group, d.position.x,
                                 d.position.y);
        } else if constexpr (std::is_same_v<T, UpdateDuCarrier>) {
          e.detail = fmt::format("{} -> {}", d.du, carrier_text(d.carrier));
        } else {
          e.detail = fmt::format("{} - {}", d.a, d.b);
        }
      },
      directive);
  record(std::move(e));
  try {
    std::visit(
        [&](const auto& d) {
          using T = std::decay_t<decltype(d)>;
          if constexpr (std::is_same_v<T, InstantiateIabNode>) {
            instantiate(d);
          } else if constexpr (std::is_same_v<T, UpdateDuCarrier>) {
            const auto du = scenario_.find_node(d.du);
            if (!du) throw Error(ErrorCode::kUnknownNode, d.du);
            du_config_update(*du, d.carrier);
          } else {
            remove_link(d);
          }
        },
        directive);
  } catch (const Error& err) {
    drop_error(NodeId{}, err);
  }
  reevaluate_access();
}

void Simulator::instantiate(const InstantiateIabNode& d) {
  for (const Node& n : scenario_.nodes()) {
    if (n.owner_group == d.group) {
      throw Error(ErrorCode::kConflictingEntry,
                  fmt::format("IAB node group {} already exists", d.group));
    }
  }
  NodeSpec mt;
  mt.role = Role::kIabMt;
  mt.position = d.position;
  mt.tx_power = d.mt_tx_power;
  mt.name = d.group + ".mt";
  mt.owner_group = d.group;
  mt.radio_override = d.radio_override;
  NodeSpec du;
  du.role = Role::kIabDu;
  du.position = d.position;
  du.tx_power = d.du_tx_power;
  du.name = d.group + ".du";
  du.owner_group = d.group;
  du.carrier = d.carrier;
  du.radio_override = d.radio_override;

  Scenario probe = scenario_;
  const NodeId probe_mt = add_node(probe, mt);
  const auto donor = best_covering_du(
      probe, probe_mt, [](const Node& n) { return n.role == Role::kDonorDu; });
  if (!donor) {
    throw Error(ErrorCode::kNoDonorCoverage,
                fmt::format("no Donor DU covers ({}, {})", d.position.x,
                            d.position.y));
  }
  const NodeId mt_id = add_node(scenario_, mt);
  const NodeId du_id = add_node(scenario_, du);
  add_link(scenario_, mt_id, du_id, LinkSpec{});
  LinkSpec backhaul;
  backhaul.medium = Medium::kRadio;
  backhaul.carrier = scenario_.node(*donor).carrier;
  add_link(scenario_, *donor, mt_id, backhaul);
}

void Simulator::remove_link(const RemoveLink& d) {
  const auto a = scenario_.find_node(d.a);
  const auto b = scenario_.find_node(d.b);
  const Link* link = (a && b) ? scenario_.find_link(*a, *b) : nullptr;
  if (!link) {
    throw Error(ErrorCode::kUnknownLink, fmt::format("{} - {}", d.a, d.b));
  }
  const LinkId id = link->id;
  for (int dir : {0, 1}) {
    auto it = queues_.find({id, dir});
    if (it == queues_.end()) continue;
    LinkDirection& q = it->second;
    for (auto* lane : {&q.control, &q.user}) {
      for (const Packet& p : *lane) drop(q.from, id, p, ErrorCode::kLinkDown);
      lane->clear();
    }
    q.busy = false;
    q.removed = true;
  }
  routes_.remove_if([&](const RouteEntry& e) {
    return (e.at_node == *a && e.next_hop == *b) ||
           (e.at_node == *b && e.next_hop == *a);
  });
  scenario_.erase_link(id);

  std::vector<NodeId> cut;
  for (const auto& [du, assoc] : control_.associations()) {
    if (traverses(assoc.transport, *a, *b)) cut.push_back(du);
  }
  std::vector<NodeId> stranded;
  for (const auto& [ue, ctx] : control_.contexts()) {
    if (ctx.state != UeState::kDetached &&
        ((ue == *a && ctx.serving_du == *b) || (ue == *b && ctx.serving_du == *a))) {
      stranded.push_back(ue);
    }
  }
  for (NodeId ue : stranded) {
    control_.detach(ue, now_, "LinkDown");
    on_terminal_detached(ue, "LinkDown");
  }
  for (NodeId du : cut) {
    const F1State s = control_.association(du)->state;
    if (s == F1State::kSetupRequested) {
      control_.fail_setup(du, now_, "TransportDown");
      remove_du_routes(du);
    } else if (s == F1State::kActive) {
      release_association(du, "TransportDown");
    }
  }
}

// ---------------------------------------------------------------------------
// Flows

void Simulator::flow_tick(int flow, std::uint64_t k) {
  const FlowSpec& f = scenario_.flows[flow];
  Packet p = make_packet(f.src, f.dst, f.packet_size);
  p.flow = static_cast<std::uint32_t>(flow + 1);
  p.seq = k;
  flow_stats_[flow].injected++;
  record_packet(TraceKind::kInject, f.src, LinkId{}, p);

  const bool downlink = scenario_.node(f.src).role == Role::kUpf;
  const NodeId ue = downlink ? f.dst : f.src;
  const UeContext* ctx = control_.context(ue);
  if (!ctx || ctx->state != UeState::kConnected) {
    drop(f.src, LinkId{}, p, ErrorCode::kUeNotConnected);
  } else {
    const NodeId next = downlink ? *scenario_.first_of(Role::kCu) : ctx->serving_du;
    const Link* link = scenario_.find_link(f.src, next);
    if (!link) {
      drop(f.src, LinkId{}, p, ErrorCode::kLinkDown);
    } else {
      transmit(link->id, f.src, std::move(p));
    }
  }

  const double interval = 8.0 * f.packet_size / f.rate;
  const double next_t = f.start + static_cast<double>(k + 1) * interval;
  if (next_t < f.stop && next_t < scenario_.duration) {
    schedule(next_t, EventKind::kFlowTick,
             [this, flow, k] { flow_tick(flow, k + 1); });
  }
}

// ---------------------------------------------------------------------------

Trace Simulator::finish() {
  Trace out = trace_;
  for (const Node& n : scenario_.nodes()) {
    out.nodes.push_back(NodeRecord{n.id, n.name, n.role});
  }
  for (std::size_t i = 0; i < scenario_.flows.size(); ++i) {
    const FlowSpec& f = scenario_.flows[i];
    const FlowStats& s = flow_stats_[i];
    FlowSummary sum;
    sum.flow_id = f.id;
    sum.offered_bps = f.rate;
    sum.goodput_bps = measure_throughput(out, f.id, 0.0, scenario_.duration);
    sum.mean_latency_s =
        s.delivered ? s.latency_sum / static_cast<double>(s.delivered) : 0.0;
    sum.drop_count = s.dropped;
    sum.injected = s.injected;
    sum.delivered = s.delivered;
    sum.in_flight = in_flight(static_cast<int>(i));
    sum.hops_total = s.hops;
    sum.backhaul_overhead_bytes = s.overhead;
    sum.delivered_payload_bytes = s.payload_bytes;
    out.flow_summaries.push_back(sum);
  }
  for (const auto& [key, q] : queues_) {
    LinkSummary l;
    l.link = key.first;
    l.from = scenario_.node(q.from).name;
    l.to = scenario_.node(q.to).name;
    l.backhaul = q.backhaul;
    if (const Link* link = scenario_.find_link(key.first)) {
      l.capacity_bps = link_capacity(scenario_, *link,
                                     direction_of(scenario_, *link, q.from));
    }
    l.packets = q.packets;
    l.bytes = q.bytes;
    l.header_bytes = q.header_bytes;
    l.max_depth = q.max_depth;
    l.utilization = q.busy_time / scenario_.duration;
    l.overhead_fraction =
        q.bytes ? static_cast<double>(q.header_bytes) / static_cast<double>(q.bytes)
                : 0.0;
    out.link_summaries.push_back(l);
  }
  return out;
}

Trace run(const Scenario& scenario, const RunOptions& options) {
  Simulator sim(scenario, options);
  sim.run();
  return sim.finish();
}

}  // namespace iab
