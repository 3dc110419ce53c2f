#pragma once

#include <string>
#include <string_view>

#include "iab/topology.h"

namespace iab {

// Strict YAML scenario reader. Unknown keys, wrong types and dangling node
// references raise ParseError with the line number; topology rules are left
// to validate_topology so they can be reported as violations.
Scenario parse_scenario(std::string_view text,
                        std::string_view source = "<scenario>");
// Throws IoError when the file cannot be read.
Scenario load_scenario(const std::string& path);

inline constexpr std::string_view kAssertionMetrics[] = {
    "goodput_bps", "mean_latency_s", "drop_count", "delivered"};

}  // namespace iab
