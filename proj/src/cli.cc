#include "iab/cli.h"

#include <filesystem>
#include <fstream>

#include <fmt/format.h>

#include "iab/error.h"
#include "iab/scenario_io.h"
#include "iab/simulator.h"

namespace iab {
namespace {

void write_file(const std::filesystem::path& path, const std::string& data) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::kIoError, fmt::format("cannot write {}", path.string()));
  f << data;
  if (!f) throw Error(ErrorCode::kIoError, fmt::format("write failed: {}", path.string()));
}

double metric_value(const Trace& trace, const Assertion& a) {
  const int idx = trace.flow_index(a.flow);
  if (idx < 0) throw Error(ErrorCode::kUnknownFlow, a.flow);
  const double t0 = a.window ? a.window->first : 0.0;
  const double t1 = a.window ? a.window->second : trace.duration;
  if (a.metric == "goodput_bps") return measure_throughput(trace, a.flow, t0, t1);
  double latency = 0.0;
  std::uint64_t delivered = 0;
  std::uint64_t drops = 0;
  for (const TraceEvent& e : trace.events) {
    if (e.flow != idx || e.time < t0 || e.time >= t1) continue;
    if (e.kind == TraceKind::kDeliver) {
      ++delivered;
      latency += e.latency;
    } else if (e.kind == TraceKind::kDrop) {
      ++drops;
    }
  }
  if (a.metric == "delivered") return static_cast<double>(delivered);
  if (a.metric == "drop_count") return static_cast<double>(drops);
  if (a.metric == "mean_latency_s") {
    return delivered ? latency / static_cast<double>(delivered) : 0.0;
  }
  throw Error(ErrorCode::kInvalidArgument, fmt::format("unknown metric {}", a.metric));
}

void print_summary(const Trace& trace, std::ostream& out) {
  out << fmt::format("scenario {}  mode {}  seed {}  duration {} s\n",
                     trace.scenario, to_string(trace.mode), trace.seed,
                     trace.duration);
  out << fmt::format("{:<14} {:>12} {:>12} {:>12} {:>8} {:>8} {:>10}\n", "flow",
                     "offered", "goodput", "latency_ms", "drops", "hops",
                     "bh_ovh_B");
  for (const FlowSummary& f : trace.flow_summaries) {
    out << fmt::format("{:<14} {:>12.0f} {:>12.0f} {:>12.3f} {:>8} {:>8} {:>10}\n",
                       f.flow_id, f.offered_bps, f.goodput_bps,
                       f.mean_latency_s * 1e3, f.drop_count, f.hops_total,
                       f.backhaul_overhead_bytes);
  }
  out << fmt::format("{:<28} {:>12} {:>8} {:>10}\n", "link", "capacity",
                     "util", "overhead");
  for (const LinkSummary& l : trace.link_summaries) {
    out << fmt::format("{:<28} {:>12.4g} {:>8.3f} {:>10.4f}\n",
                       fmt::format("{}->{}", l.from, l.to), l.capacity_bps,
                       l.utilization, l.overhead_fraction);
  }
}

}  // namespace

std::vector<AssertionResult> evaluate_assertions(const Scenario& scenario,
                                                 const Trace& trace) {
  std::vector<AssertionResult> results;
  for (const Assertion& a : scenario.assertions) {
    AssertionResult r;
    r.assertion = a;
    r.value = metric_value(trace, a);
    r.pass = (!a.min || r.value >= *a.min) && (!a.max || r.value <= *a.max);
    results.push_back(r);
  }
  return results;
}

int cmd_validate(const std::string& scenario_path, std::ostream& out,
                 std::ostream& err) {
  try {
    const Scenario s = load_scenario(scenario_path);
    const ValidationReport report = validate_topology(s);
    if (report.ok()) {
      out << fmt::format("{}: ok ({} nodes, {} links, {} flows, {} directives)\n",
                         scenario_path, s.nodes().size(), s.links().size(),
                         s.flows.size(), s.schedule.size());
      return kExitOk;
    }
    out << fmt::format("{}: {} violation(s)\n", scenario_path,
                       report.violations.size());
    for (const Violation& v : report.violations) {
      out << fmt::format("  [{}] {}\n", v.code, v.message);
    }
    return kExitFailed;
  } catch (const Error& e) {
    err << e.what() << "\n";
    return kExitError;
  }
}

int cmd_run(const RunConfig& config, std::ostream& out, std::ostream& err) {
  try {
    const Scenario s = load_scenario(config.scenario_path);
    RunOptions opts;
    opts.mode = config.mode;
    opts.seed = config.seed_override;
    const Trace trace = run(s, opts);

    const std::filesystem::path dir(config.output_dir);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) {
      throw Error(ErrorCode::kIoError,
                  fmt::format("cannot create {}: {}", dir.string(), ec.message()));
    }
    write_file(dir / "trace.jsonl", to_jsonl(trace, config.trace_level));
    write_file(dir / "summary.json", summary_json(trace));
    write_file(dir / "throughput.csv", throughput_csv(trace));

    print_summary(trace, out);
    bool all_pass = true;
    for (const AssertionResult& r : evaluate_assertions(s, trace)) {
      const Assertion& a = r.assertion;
      std::string bounds;
      if (a.min) bounds += fmt::format(">= {:g}", *a.min);
      if (a.max) bounds += fmt::format("{}<= {:g}", bounds.empty() ? "" : ", ", *a.max);
      std::string window =
          a.window ? fmt::format(" in [{:g}, {:g})", a.window->first, a.window->second)
                   : "";
      out << fmt::format("assert {} {}{} = {:.6g} ({}) : {}\n", a.flow, a.metric,
                         window, r.value, bounds, r.pass ? "PASS" : "FAIL");
      all_pass = all_pass && r.pass;
    }
    out << fmt::format("artifacts written to {}\n", dir.string());
    return all_pass ? kExitOk : kExitFailed;
  } catch (const Error& e) {
    err << e.what() << "\n";
    return kExitError;
  }
}

int cmd_compare(const std::string& trace_a, const std::string& trace_b,
                std::ostream& out, std::ostream& err) {
  try {
    auto read = [](const std::string& path) {
      std::ifstream in(path);
      if (!in) throw Error(ErrorCode::kIoError, fmt::format("cannot read {}", path));
      return read_trace_digest(in);
    };
    const TraceDigest a = read(trace_a);
    const TraceDigest b = read(trace_b);
    const CompareReport report = compare(a, b);
    out << fmt::format("a = {} ({}), b = {} ({}); deltas are b - a\n", trace_a,
                       a.mode, trace_b, b.mode);
    out << format_report(report);
    return kExitOk;
  } catch (const Error& e) {
    err << e.what() << "\n";
    return kExitError;
  }
}

}  // namespace iab
