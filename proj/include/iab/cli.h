#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "iab/packet.h"
#include "iab/topology.h"
#include "iab/trace.h"

namespace iab {

enum ExitStatus { kExitOk = 0, kExitFailed = 1, kExitError = 2 };

struct RunConfig {
  std::string scenario_path;
  std::optional<std::uint64_t> seed_override;
  PathMode mode = PathMode::kUpfReroute;
  std::string output_dir = "out";
  TraceLevel trace_level = TraceLevel::kSummary;
};

struct AssertionResult {
  Assertion assertion;
  double value = 0.0;
  bool pass = false;
};

std::vector<AssertionResult> evaluate_assertions(const Scenario& scenario,
                                                 const Trace& trace);

// Each command prints its report to `out`, diagnostics to `err`, and returns
// 0 on success, 1 on violations / failed assertions, 2 on errors.
int cmd_validate(const std::string& scenario_path, std::ostream& out,
                 std::ostream& err);
int cmd_run(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_compare(const std::string& trace_a, const std::string& trace_b,
                std::ostream& out, std::ostream& err);

}  // namespace iab
