#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "iab/simulator.h"
#include "iab/topology.h"
#include "iab/trace.h"

namespace iab::testing {

std::string scenario_path(const std::string& name);
Scenario load_bundled(const std::string& name);

Carrier n41();
Carrier n78();

// CU, UPF and one Donor DU (wired 1 Gbit/s), plus UEs at the given x offsets.
Scenario donor_only(const std::vector<double>& ue_x, double duration = 1.0);

// The reference deployment with the IAB node built statically (no directive).
Scenario static_iab();

// Closed-form oracles, written independently of the library formulas.
double fspl_oracle_db(double freq_hz, double dist_m);
double noise_oracle_dbm(double bandwidth_hz, double nf_db);
double capacity_oracle(double bw, double snr_db, double eff, double frac);

std::vector<std::string> hop_names(const Trace& trace,
                                   const std::vector<NodeId>& hops);
std::vector<std::string> hop_names(const Scenario& scenario,
                                   const std::vector<NodeId>& hops);

// Cuts the run short, clipping flows and dropping checks that no longer fit.
void shorten(Scenario& s, double duration);

// Replays the trace and lists every user-plane event of a UE flow that
// happens while the UE is not Connected, and every F1 delivery while the
// association (as replayed from transition events) is Idle or Released.
std::vector<std::string> audit_protocol_ordering(const Trace& trace);

// Multiset of (flow, seq-free payload) deliveries: payload sizes per flow id.
std::vector<std::pair<std::string, std::uint32_t>> delivered_payloads(
    const Trace& trace);

// Hand-rolled generator for randomized cases.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}
  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng_);
  }
  int integer(int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(rng_);
  }
  bool coin(double p = 0.5) { return uniform(0.0, 1.0) < p; }
  std::uint64_t bits() { return rng_(); }

 private:
  std::mt19937_64 rng_;
};

struct RandomCase {
  Scenario scenario;
  PathMode mode = PathMode::kUpfReroute;
  bool has_iab = false;
};

// Small random deployments: donor UEs, far UEs, an optional IAB node, mixed
// DL/UL flows, random queue sizes. Always valid.
RandomCase random_case(Gen& g);

// Property checks shared by the gtest suites and the acceptance binary. Each
// runs `cases` randomized cases and returns the first failure, if any.
std::optional<std::string> prop_encapsulation_round_trip(int cases);
std::optional<std::string> prop_nesting_depth(int cases);
std::optional<std::string> prop_conservation(int cases);
std::optional<std::string> prop_throughput_bound(int cases);
std::optional<std::string> prop_capacity_monotonic(int cases);
std::optional<std::string> prop_trace_determinism(int cases);

}  // namespace iab::testing

// Runs `stmt` and checks it throws iab::Error with the given code.
#define EXPECT_IAB_ERROR(stmt, ec)                                         \
  do {                                                                     \
    try {                                                                  \
      stmt;                                                                \
      ADD_FAILURE() << #stmt " did not throw";                             \
    } catch (const ::iab::Error& iab_err_) {                               \
      EXPECT_EQ(::iab::to_string(iab_err_.code()), ::iab::to_string(ec))   \
          << iab_err_.what();                                              \
    }                                                                      \
  } while (0)
