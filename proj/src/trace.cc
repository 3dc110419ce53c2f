#include "iab/trace.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include <fmt/format.h>

#include "iab/error.h"
#include "json.hpp"

namespace iab {
namespace {

using Json = nlohmann::ordered_json;

bool user_packet_event(const TraceEvent& e) {
  switch (e.kind) {
    case TraceKind::kInject:
    case TraceKind::kForward:
    case TraceKind::kDeliver:
      return e.flow >= 0;
    case TraceKind::kDrop:
      return e.flow >= 0;
    default:
      return false;
  }
}

Json event_json(const Trace& trace, const TraceEvent& e, std::size_t seq) {
  Json j;
  j["type"] = "event";
  j["seq"] = seq;
  j["t"] = e.time;
  j["kind"] = to_string(e.kind);
  if (e.node.valid()) j["node"] = trace.node_name(e.node);
  if (e.link.valid()) j["link"] = e.link.value;
  if (e.subject.valid()) j["subject"] = trace.node_name(e.subject);
  switch (e.kind) {
    case TraceKind::kInject:
    case TraceKind::kForward:
    case TraceKind::kDeliver:
    case TraceKind::kDrop:
      if (e.packet != 0 || e.flow >= 0) {
        j["flow"] = e.flow >= 0 ? Json(trace.flows[e.flow].id) : Json(nullptr);
        j["packet"] = e.packet;
        j["payload"] = e.payload;
        j["wire"] = e.wire;
        j["depth"] = e.depth;
        j["teids"] = e.teids;
      }
      break;
    default:
      break;
  }
  if (e.kind == TraceKind::kDeliver) {
    Json hops = Json::array();
    for (NodeId n : e.hop_log) hops.push_back(trace.node_name(n));
    j["hop_log"] = std::move(hops);
    j["latency"] = e.latency;
  }
  if (!e.code.empty()) j["code"] = e.code;
  if (!e.entity.empty()) j["entity"] = e.entity;
  if (!e.from.empty() || e.kind == TraceKind::kTransition) j["from"] = e.from;
  if (!e.to.empty()) j["to"] = e.to;
  if (!e.detail.empty()) j["detail"] = e.detail;
  return j;
}

Json flow_summary_json(const FlowSummary& f) {
  Json j;
  j["flow_id"] = f.flow_id;
  j["offered_bps"] = f.offered_bps;
  j["goodput_bps"] = f.goodput_bps;
  j["mean_latency_s"] = f.mean_latency_s;
  j["drop_count"] = f.drop_count;
  j["injected"] = f.injected;
  j["delivered"] = f.delivered;
  j["in_flight"] = f.in_flight;
  j["hops_total"] = f.hops_total;
  j["backhaul_overhead_bytes"] = f.backhaul_overhead_bytes;
  j["delivered_payload_bytes"] = f.delivered_payload_bytes;
  return j;
}

Json link_summary_json(const LinkSummary& l) {
  Json j;
  j["link"] = l.link.value;
  j["from"] = l.from;
  j["to"] = l.to;
  j["backhaul"] = l.backhaul;
  j["capacity_bps"] = std::isfinite(l.capacity_bps) ? Json(l.capacity_bps)
                                                    : Json(nullptr);
  j["packets"] = l.packets;
  j["bytes"] = l.bytes;
  j["header_bytes"] = l.header_bytes;
  j["max_depth"] = l.max_depth;
  j["utilization"] = l.utilization;
  j["overhead_fraction"] = l.overhead_fraction;
  return j;
}

FlowSummary flow_summary_from(const Json& j) {
  FlowSummary f;
  f.flow_id = j.at("flow_id").get<std::string>();
  f.offered_bps = j.at("offered_bps").get<double>();
  f.goodput_bps = j.at("goodput_bps").get<double>();
  f.mean_latency_s = j.at("mean_latency_s").get<double>();
  f.drop_count = j.at("drop_count").get<std::uint64_t>();
  f.injected = j.value("injected", std::uint64_t{0});
  f.delivered = j.value("delivered", std::uint64_t{0});
  f.in_flight = j.value("in_flight", std::uint64_t{0});
  f.hops_total = j.at("hops_total").get<std::uint64_t>();
  f.backhaul_overhead_bytes = j.at("backhaul_overhead_bytes").get<std::uint64_t>();
  f.delivered_payload_bytes = j.value("delivered_payload_bytes", std::uint64_t{0});
  return f;
}

LinkSummary link_summary_from(const Json& j) {
  LinkSummary l;
  l.link = LinkId{j.at("link").get<std::uint32_t>()};
  l.from = j.at("from").get<std::string>();
  l.to = j.at("to").get<std::string>();
  l.backhaul = j.at("backhaul").get<bool>();
  const Json& cap = j.at("capacity_bps");
  l.capacity_bps = cap.is_null() ? INFINITY : cap.get<double>();
  l.packets = j.at("packets").get<std::uint64_t>();
  l.bytes = j.at("bytes").get<std::uint64_t>();
  l.header_bytes = j.at("header_bytes").get<std::uint64_t>();
  l.max_depth = j.at("max_depth").get<std::uint32_t>();
  l.utilization = j.at("utilization").get<double>();
  l.overhead_fraction = j.at("overhead_fraction").get<double>();
  return l;
}

}  // namespace

std::string_view to_string(TraceKind kind) {
  switch (kind) {
    case TraceKind::kInject: return "inject";
    case TraceKind::kForward: return "forward";
    case TraceKind::kDeliver: return "deliver";
    case TraceKind::kDrop: return "drop";
    case TraceKind::kTransition: return "transition";
    case TraceKind::kDirective: return "directive";
    case TraceKind::kTimer: return "timer";
    case TraceKind::kCarrier: return "carrier";
  }
  return "?";
}

std::string_view to_string(TraceLevel level) {
  return level == TraceLevel::kFull ? "full" : "summary";
}

std::optional<TraceLevel> parse_trace_level(std::string_view text) {
  if (text == "full" || text == "Full") return TraceLevel::kFull;
  if (text == "summary" || text == "Summary") return TraceLevel::kSummary;
  return std::nullopt;
}

std::string Trace::node_name(NodeId id) const {
  if (id.valid() && id.value <= nodes.size()) return nodes[id.value - 1].name;
  return fmt::format("#{}", id.value);
}

int Trace::flow_index(std::string_view id) const {
  for (std::size_t i = 0; i < flows.size(); ++i) {
    if (flows[i].id == id) return static_cast<int>(i);
  }
  return -1;
}

std::string to_jsonl(const Trace& trace, TraceLevel level) {
  std::string out;
  Json header;
  header["type"] = "header";
  header["schema_version"] = trace.schema_version;
  header["scenario"] = trace.scenario;
  header["seed"] = trace.seed;
  header["mode"] = to_string(trace.mode);
  header["duration"] = trace.duration;
  header["trace_level"] = to_string(level);
  Json flows = Json::array();
  for (const FlowRecord& f : trace.flows) {
    Json jf;
    jf["id"] = f.id;
    jf["src"] = trace.node_name(f.src);
    jf["dst"] = trace.node_name(f.dst);
    jf["rate"] = f.rate;
    jf["packet_size"] = f.packet_size;
    jf["start"] = f.start;
    jf["stop"] = f.stop;
    flows.push_back(std::move(jf));
  }
  header["flows"] = std::move(flows);
  out += header.dump();
  out += '\n';
  for (std::size_t i = 0; i < trace.events.size(); ++i) {
    const TraceEvent& e = trace.events[i];
    if (level == TraceLevel::kSummary && user_packet_event(e)) continue;
    out += event_json(trace, e, i).dump();
    out += '\n';
  }
  for (const NodeRecord& n : trace.nodes) {
    Json j;
    j["type"] = "node";
    j["id"] = n.id.value;
    j["name"] = n.name;
    j["role"] = to_string(n.role);
    out += j.dump();
    out += '\n';
  }
  for (const FlowSummary& f : trace.flow_summaries) {
    Json j = flow_summary_json(f);
    Json line;
    line["type"] = "flow_summary";
    line.update(j);
    out += line.dump();
    out += '\n';
  }
  for (const LinkSummary& l : trace.link_summaries) {
    Json line;
    line["type"] = "link_summary";
    line.update(link_summary_json(l));
    out += line.dump();
    out += '\n';
  }
  return out;
}

std::string summary_json(const Trace& trace) {
  Json j;
  j["schema_version"] = trace.schema_version;
  j["scenario"] = trace.scenario;
  j["seed"] = trace.seed;
  j["mode"] = to_string(trace.mode);
  j["duration"] = trace.duration;
  Json flows = Json::array();
  for (const FlowSummary& f : trace.flow_summaries) {
    flows.push_back(flow_summary_json(f));
  }
  j["flows"] = std::move(flows);
  Json links = Json::array();
  for (const LinkSummary& l : trace.link_summaries) {
    links.push_back(link_summary_json(l));
  }
  j["links"] = std::move(links);
  return j.dump(2) + "\n";
}

std::string throughput_csv(const Trace& trace) {
  const std::size_t bins =
      static_cast<std::size_t>(std::ceil(trace.duration - 1e-12));
  std::vector<std::vector<double>> bits(trace.flows.size(),
                                        std::vector<double>(bins, 0.0));
  for (const TraceEvent& e : trace.events) {
    if (e.kind != TraceKind::kDeliver || e.flow < 0) continue;
    auto b = static_cast<std::size_t>(std::floor(e.time));
    if (b < bins) bits[e.flow][b] += 8.0 * e.payload;
  }
  std::string out = "flow_id,t_start,t_end,goodput_bps\n";
  for (std::size_t f = 0; f < trace.flows.size(); ++f) {
    for (std::size_t b = 0; b < bins; ++b) {
      const double t1 = std::min<double>(b + 1, trace.duration);
      out += fmt::format("{},{},{},{}\n", trace.flows[f].id, b, t1,
                         bits[f][b] / (t1 - b));
    }
  }
  return out;
}

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t trace_hash(const Trace& trace) {
  return fnv1a(to_jsonl(trace, TraceLevel::kFull));
}

double measure_throughput(const Trace& trace, std::string_view flow_id,
                          double t0, double t1) {
  const int idx = trace.flow_index(flow_id);
  if (idx < 0) throw Error(ErrorCode::kUnknownFlow, std::string(flow_id));
  if (!(t1 > t0)) {
    throw Error(ErrorCode::kInvalidArgument,
                fmt::format("window [{}, {}) is empty", t0, t1));
  }
  double bits = 0.0;
  for (const TraceEvent& e : trace.events) {
    if (e.kind == TraceKind::kDeliver && e.flow == idx && e.time >= t0 &&
        e.time < t1) {
      bits += 8.0 * e.payload;
    }
  }
  return bits / (t1 - t0);
}

std::uint64_t TraceDigest::backhaul_overhead_bytes() const {
  std::uint64_t total = 0;
  for (const LinkSummary& l : links) {
    if (l.backhaul) total += l.header_bytes;
  }
  return total;
}

TraceDigest digest(const Trace& trace) {
  TraceDigest d;
  d.schema_version = trace.schema_version;
  d.scenario = trace.scenario;
  d.mode = std::string(to_string(trace.mode));
  d.flows = trace.flow_summaries;
  d.links = trace.link_summaries;
  return d;
}

TraceDigest read_trace_digest(std::istream& in) {
  TraceDigest d;
  std::string line;
  int lineno = 0;
  bool seen_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      Json j = Json::parse(line);
      const std::string type = j.at("type").get<std::string>();
      if (type == "header") {
        d.schema_version = j.at("schema_version").get<int>();
        d.scenario = j.value("scenario", "");
        d.mode = j.value("mode", "");
        seen_header = true;
      } else if (type == "flow_summary") {
        d.flows.push_back(flow_summary_from(j));
      } else if (type == "link_summary") {
        d.links.push_back(link_summary_from(j));
      }
    } catch (const nlohmann::json::exception& ex) {
      throw Error(ErrorCode::kParseError,
                  fmt::format("trace line {}: {}", lineno, ex.what()));
    }
  }
  if (!seen_header) {
    throw Error(ErrorCode::kParseError, "trace has no header record");
  }
  return d;
}

bool CompareReport::all_zero() const {
  if (total_backhaul_overhead_bytes != 0) return false;
  return std::all_of(flows.begin(), flows.end(), [](const FlowDelta& f) {
    return f.in_a && f.in_b && f.goodput_bps == 0.0 &&
           f.mean_latency_s == 0.0 && f.hops_total == 0 &&
           f.backhaul_overhead_bytes == 0 && f.drop_count == 0;
  });
}

CompareReport compare(const TraceDigest& a, const TraceDigest& b) {
  if (a.schema_version != b.schema_version) {
    throw Error(ErrorCode::kSchemaMismatch,
                fmt::format("schema_version {} vs {}", a.schema_version,
                            b.schema_version));
  }
  CompareReport report;
  auto find = [](const TraceDigest& d, const std::string& id) -> const FlowSummary* {
    for (const FlowSummary& f : d.flows) {
      if (f.flow_id == id) return &f;
    }
    return nullptr;
  };
  std::vector<std::string> ids;
  for (const FlowSummary& f : a.flows) ids.push_back(f.flow_id);
  for (const FlowSummary& f : b.flows) {
    if (!find(a, f.flow_id)) ids.push_back(f.flow_id);
  }
  const FlowSummary zero;
  for (const std::string& id : ids) {
    const FlowSummary* fa = find(a, id);
    const FlowSummary* fb = find(b, id);
    const FlowSummary& x = fa ? *fa : zero;
    const FlowSummary& y = fb ? *fb : zero;
    FlowDelta d;
    d.flow_id = id;
    d.in_a = fa != nullptr;
    d.in_b = fb != nullptr;
    d.goodput_bps = y.goodput_bps - x.goodput_bps;
    d.mean_latency_s = y.mean_latency_s - x.mean_latency_s;
    d.hops_total = static_cast<std::int64_t>(y.hops_total) -
                   static_cast<std::int64_t>(x.hops_total);
    d.backhaul_overhead_bytes =
        static_cast<std::int64_t>(y.backhaul_overhead_bytes) -
        static_cast<std::int64_t>(x.backhaul_overhead_bytes);
    d.drop_count = static_cast<std::int64_t>(y.drop_count) -
                   static_cast<std::int64_t>(x.drop_count);
    report.flows.push_back(d);
  }
  report.total_backhaul_overhead_bytes =
      static_cast<std::int64_t>(b.backhaul_overhead_bytes()) -
      static_cast<std::int64_t>(a.backhaul_overhead_bytes());
  return report;
}

std::string format_report(const CompareReport& report) {
  std::string out = fmt::format("{:<16} {:>14} {:>14} {:>10} {:>14} {:>8}\n",
                                "flow", "d_goodput_bps", "d_latency_s",
                                "d_hops", "d_overhead_B", "d_drops");
  for (const FlowDelta& d : report.flows) {
    std::string name = d.flow_id;
    if (!d.in_a) name += " (b only)";
    if (!d.in_b) name += " (a only)";
    out += fmt::format("{:<16} {:>14.1f} {:>14.6g} {:>10} {:>14} {:>8}\n", name,
                       d.goodput_bps, d.mean_latency_s, d.hops_total,
                       d.backhaul_overhead_bytes, d.drop_count);
  }
  out += fmt::format("backhaul overhead bytes (all traffic): {:+}\n",
                     report.total_backhaul_overhead_bytes);
  return out;
}

}  // namespace iab
