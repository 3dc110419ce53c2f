#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <queue>
#include <vector>

#include "iab/error.h"
#include "iab/f1ap.h"
#include "iab/packet.h"
#include "iab/routing.h"
#include "iab/topology.h"
#include "iab/trace.h"

namespace iab {

struct RunOptions {
  std::optional<PathMode> mode;        // UpfReroute when unset
  std::optional<std::uint64_t> seed;   // overrides the scenario seed
  // Start the donor F1 setups, flows and scheduled directives at t = 0. Unit
  // tests turn this off and drive the procedures by hand.
  bool auto_start = true;
};

enum class EventKind { kArrival, kDeparture, kTimerExpiry, kDirective, kFlowTick, kProcedure };

// One direction of a link: strict-priority control queue over a FIFO user
// queue. The packet in service stays at the front of its queue.
struct LinkDirection {
  NodeId from;
  NodeId to;
  bool backhaul = false;
  bool removed = false;
  std::deque<Packet> control;
  std::deque<Packet> user;
  bool busy = false;
  bool serving_control = false;
  std::uint64_t packets = 0;
  std::uint64_t bytes = 0;
  std::uint64_t header_bytes = 0;
  std::uint32_t max_depth = 0;
  double busy_time = 0.0;
};

class Simulator {
 public:
  // Throws ScenarioInvalid when validate_topology reports violations.
  explicit Simulator(Scenario scenario, RunOptions options = {});

  void run();
  // Processes every event with time <= t (and before the scenario end).
  void run_until(double t);
  double now() const { return now_; }
  PathMode mode() const { return mode_; }

  // Procedures. Preconditions are checked synchronously and throw; the
  // message exchanges then unfold as events.
  void f1_setup(NodeId du);
  void ue_attach(NodeId ue, NodeId du);
  // Allocates the MT session tunnels, installs the DU node's F1 routes for
  // both directions and starts its F1 setup.
  void establish_pdu_session(NodeId mt);
  void du_config_update(NodeId du, const Carrier& carrier);
  void release(NodeId du);
  void apply_directive(const Directive& directive);
  // Attaches every detached UE/MT to its best covering DU with an Active
  // association (MTs only to Donor DUs).
  void reevaluate_access();

  // Queues a packet on the link direction leaving `from`. Returns false when
  // the packet was dropped (link missing, buffer full).
  bool transmit(LinkId link, NodeId from, Packet packet);
  // Fresh packet id and TTL.
  Packet make_packet(NodeId src, NodeId dst, std::uint32_t payload);

  const Scenario& scenario() const { return scenario_; }
  const ControlPlane& control() const { return control_; }
  const RoutingTable& routes() const { return routes_; }
  const TunnelRegistry& tunnels() const { return tunnels_; }
  const Trace& trace() const { return trace_; }
  const LinkDirection* link_direction(LinkId link, NodeId from) const;
  std::optional<Path> transport_path(NodeId du) const;
  // Packets of a flow queued on links or propagating.
  std::uint64_t in_flight(int flow) const;

  // Fills node records and summaries. Call after run().
  Trace finish();

 private:
  struct Event {
    double time;
    std::uint64_t seq;
    EventKind kind;
    std::function<void()> action;
  };
  struct Later {
    bool operator()(const Event& x, const Event& y) const {
      return x.time != y.time ? x.time > y.time : x.seq > y.seq;
    }
  };
  struct FlowStats {
    std::uint64_t injected = 0;
    std::uint64_t delivered = 0;
    std::uint64_t dropped = 0;
    std::uint64_t hops = 0;
    std::uint64_t overhead = 0;
    std::uint64_t payload_bytes = 0;
    double latency_sum = 0.0;
  };

  void schedule(double t, EventKind kind, std::function<void()> action);
  void start();
  void flow_tick(int flow, std::uint64_t k);

  void send_control(NodeId from, NodeId to, F1Message msg);
  // Hands a packet to the routing table at `node` and queues the result.
  void route_from(NodeId node, Packet packet);
  void on_arrival(NodeId node, LinkId via, Packet packet);
  void on_control(NodeId node, const Packet& packet);
  LinkDirection& direction_state(const Link& link, int dir);
  void try_start_service(LinkId link, int dir);
  void on_departure(LinkId link, int dir);

  void record(TraceEvent e);
  void record_packet(TraceKind kind, NodeId node, LinkId link,
                     const Packet& p, std::string code = {});
  void drop(NodeId node, LinkId link, const Packet& p, ErrorCode code,
            std::string detail = {});
  // Directive / procedure failures that do not stop the run.
  void drop_error(NodeId node, const Error& err);

  void send_setup_request(NodeId du);
  void on_setup_timer(NodeId du, int attempt);
  double control_rtt(const Path& path) const;
  void on_terminal_connected(NodeId terminal);
  void on_terminal_detached(NodeId terminal, std::string_view cause);
  void remove_bearer_routes(NodeId ue);
  void release_association(NodeId du, std::string_view cause);
  void install_du_routes(NodeId du);
  void remove_du_routes(NodeId du);
  void apply_carrier(NodeId du, const Carrier& carrier);
  void remove_link(const RemoveLink& d);
  void instantiate(const InstantiateIabNode& d);
  bool backhaul(const Link& link) const;
  int flow_of(const Packet& p) const { return static_cast<int>(p.flow) - 1; }

  Scenario scenario_;
  RunOptions options_;
  PathMode mode_;
  std::uint64_t seed_;
  ControlPlane control_;
  RoutingTable routes_;
  TunnelRegistry tunnels_;
  Trace trace_;

  double now_ = 0.0;
  std::uint64_t next_seq_ = 0;
  std::uint64_t next_packet_ = 1;
  std::uint64_t next_transaction_ = 1;
  std::uint32_t next_bap_route_ = 1;
  std::priority_queue<Event, std::vector<Event>, Later> events_;
  std::map<std::pair<LinkId, int>, LinkDirection> queues_;
  std::map<NodeId, TransportTunnels> transport_;
  std::map<NodeId, BearerTunnels> bearers_;     // installed bearer routes
  std::map<NodeId, std::vector<RouteEntry>> du_routes_;  // F1 transport entries
  std::map<NodeId, TunnelKey> pending_uplink_;  // UE -> F1-U UL during attach
  std::vector<FlowStats> flow_stats_;
  std::vector<std::uint64_t> propagating_;
};

Trace run(const Scenario& scenario, const RunOptions& options = {});

}  // namespace iab
