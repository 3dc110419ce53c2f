#pragma once

#include <cstdint>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "iab/ids.h"
#include "iab/packet.h"
#include "iab/topology.h"

namespace iab {

inline constexpr int kTraceSchemaVersion = 1;

enum class TraceKind {
  kInject,      // user packet enters the network at its source
  kForward,     // a node handled a packet and put it on a link
  kDeliver,     // packet consumed at its terminus
  kDrop,
  kTransition,  // control-plane state change
  kDirective,
  kTimer,
  kCarrier,     // a DU's advertised carrier changed
};

std::string_view to_string(TraceKind kind);

enum class TraceLevel { kSummary, kFull };

std::string_view to_string(TraceLevel level);
std::optional<TraceLevel> parse_trace_level(std::string_view text);

struct TraceEvent {
  double time = 0.0;
  TraceKind kind = TraceKind::kInject;
  NodeId node;
  LinkId link;
  // DU whose F1 association a control message belongs to.
  NodeId subject;
  int flow = -1;  // index into Trace::flows; -1 for control traffic
  std::uint64_t packet = 0;
  std::uint32_t payload = 0;
  std::uint32_t wire = 0;
  std::uint32_t depth = 0;
  std::vector<std::uint32_t> teids;
  std::vector<NodeId> hop_log;  // deliver only
  double latency = 0.0;         // deliver only
  // Drop cause, F1 message kind, directive or timer name.
  std::string code;
  std::string detail;
  // Transitions: entity kind and states. For a delivered F1 message, `to`
  // holds the association state at delivery time.
  std::string entity;
  std::string from;
  std::string to;
};

struct NodeRecord {
  NodeId id;
  std::string name;
  Role role = Role::kUe;
};

struct FlowRecord {
  std::string id;
  NodeId src;
  NodeId dst;
  double rate = 0.0;
  std::uint32_t packet_size = 0;
  double start = 0.0;
  double stop = 0.0;
};

struct FlowSummary {
  std::string flow_id;
  double offered_bps = 0.0;
  double goodput_bps = 0.0;  // over the whole run
  double mean_latency_s = 0.0;
  std::uint64_t drop_count = 0;
  std::uint64_t injected = 0;
  std::uint64_t delivered = 0;
  std::uint64_t in_flight = 0;
  std::uint64_t hops_total = 0;
  std::uint64_t backhaul_overhead_bytes = 0;
  std::uint64_t delivered_payload_bytes = 0;
};

struct LinkSummary {
  LinkId link;
  std::string from;
  std::string to;
  bool backhaul = false;
  double capacity_bps = 0.0;
  std::uint64_t packets = 0;
  std::uint64_t bytes = 0;
  std::uint64_t header_bytes = 0;
  std::uint32_t max_depth = 0;
  double utilization = 0.0;
  double overhead_fraction = 0.0;
};

struct Trace {
  int schema_version = kTraceSchemaVersion;
  std::string scenario;
  std::uint64_t seed = 0;
  PathMode mode = PathMode::kUpfReroute;
  double duration = 0.0;
  std::vector<NodeRecord> nodes;
  std::vector<FlowRecord> flows;
  std::vector<TraceEvent> events;
  std::vector<FlowSummary> flow_summaries;
  std::vector<LinkSummary> link_summaries;

  std::string node_name(NodeId id) const;
  // Index into flows, or -1.
  int flow_index(std::string_view id) const;
};

// Header line, events, node records and summary records, one JSON object per
// line. Summary level omits per-packet user-plane events.
std::string to_jsonl(const Trace& trace, TraceLevel level = TraceLevel::kFull);
std::string summary_json(const Trace& trace);
// Per-flow goodput in one-second bins.
std::string throughput_csv(const Trace& trace);

std::uint64_t fnv1a(std::string_view bytes);
std::uint64_t trace_hash(const Trace& trace);

// Delivered payload bits with delivery time in [t0, t1), divided by t1 - t0.
double measure_throughput(const Trace& trace, std::string_view flow_id,
                          double t0, double t1);

// What a trace file records about its run, read back from JSONL.
struct TraceDigest {
  int schema_version = 0;
  std::string scenario;
  std::string mode;
  std::vector<FlowSummary> flows;
  std::vector<LinkSummary> links;

  std::uint64_t backhaul_overhead_bytes() const;
};

TraceDigest digest(const Trace& trace);
// Throws ParseError on malformed lines.
TraceDigest read_trace_digest(std::istream& in);

struct FlowDelta {
  std::string flow_id;
  bool in_a = false;
  bool in_b = false;
  double goodput_bps = 0.0;  // b - a
  double mean_latency_s = 0.0;
  std::int64_t hops_total = 0;
  std::int64_t backhaul_overhead_bytes = 0;
  std::int64_t drop_count = 0;
};

struct CompareReport {
  std::vector<FlowDelta> flows;
  std::int64_t total_backhaul_overhead_bytes = 0;  // b - a

  bool all_zero() const;
};

// Throws SchemaMismatch when the schema versions differ.
CompareReport compare(const TraceDigest& a, const TraceDigest& b);
std::string format_report(const CompareReport& report);

}  // namespace iab
