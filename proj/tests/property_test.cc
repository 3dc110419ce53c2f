#include <gtest/gtest.h>

#include "support.h"

using namespace iab::testing;

namespace {
constexpr int kCases = 200;
}

TEST(Property, EncapsulationRoundTrip) {
  const auto failure = prop_encapsulation_round_trip(kCases);
  EXPECT_FALSE(failure.has_value()) << *failure;
}

TEST(Property, NestingDepthPerMode) {
  const auto failure = prop_nesting_depth(kCases);
  EXPECT_FALSE(failure.has_value()) << *failure;
}

TEST(Property, PerFlowConservation) {
  const auto failure = prop_conservation(kCases);
  EXPECT_FALSE(failure.has_value()) << *failure;
}

TEST(Property, GoodputBelowBottleneck) {
  const auto failure = prop_throughput_bound(kCases);
  EXPECT_FALSE(failure.has_value()) << *failure;
}

TEST(Property, CapacityMonotonicity) {
  const auto failure = prop_capacity_monotonic(kCases);
  EXPECT_FALSE(failure.has_value()) << *failure;
}

TEST(Property, TraceDeterminism) {
  const auto failure = prop_trace_determinism(kCases);
  EXPECT_FALSE(failure.has_value()) << *failure;
}
