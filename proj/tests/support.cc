#include "support.h"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <map>

#include "iab/error.h"
#include "iab/radio.h"
#include "iab/scenario_io.h"

namespace iab::testing {

std::string scenario_path(const std::string& name) {
  return std::string(IAB_SCENARIO_DIR) + "/" + name + ".yaml";
}

Scenario load_bundled(const std::string& name) {
  return load_scenario(scenario_path(name));
}

Carrier n41() { return Carrier{"n41", 2.585e9, 20e6, 30e3}; }
Carrier n78() { return Carrier{"n78", 3.47e9, 30e6, 30e3}; }

Scenario donor_only(const std::vector<double>& ue_x, double duration) {
  Scenario s;
  s.name = "donor-only";
  s.duration = duration;
  const NodeId cu = add_node(s, {Role::kCu, {0, -20}, {}, "cu"});
  const NodeId upf = add_node(s, {Role::kUpf, {0, -40}, {}, "upf"});
  NodeSpec du{Role::kDonorDu, {0, 0}, 20.0, "donor-du"};
  du.carrier = n41();
  const NodeId donor = add_node(s, du);
  LinkSpec wired;
  wired.wired_capacity = 1e9;
  wired.propagation_delay = 2e-6;
  add_link(s, cu, donor, wired);
  wired.propagation_delay = 50e-6;
  add_link(s, cu, upf, wired);
  for (std::size_t i = 0; i < ue_x.size(); ++i) {
    add_node(s, {Role::kUe, {ue_x[i], 0}, 23.0, fmt::format("ue{}", i + 1)});
  }
  return s;
}

Scenario static_iab() {
  Scenario s = load_bundled("paper-reference");
  s.schedule.clear();
  s.assertions.clear();
  RadioOverride aerial;
  aerial.pathloss_exponent = 2.0;
  NodeSpec mt{Role::kIabMt, {1200, 0}, 23.0, "uav1.mt", "uav1"};
  mt.radio_override = aerial;
  NodeSpec du{Role::kIabDu, {1200, 0}, 32.0, "uav1.du", "uav1"};
  du.carrier = n78();
  du.radio_override = aerial;
  const NodeId mt_id = add_node(s, mt);
  const NodeId du_id = add_node(s, du);
  add_link(s, mt_id, du_id, LinkSpec{});
  LinkSpec radio;
  radio.medium = Medium::kRadio;
  radio.carrier = n41();
  add_link(s, *s.find_node("donor-du"), mt_id, radio);
  return s;
}

// Textbook form with d in km and f in MHz.
double fspl_oracle_db(double freq_hz, double dist_m) {
  return 20.0 * std::log10(dist_m / 1000.0) + 20.0 * std::log10(freq_hz / 1e6) +
         32.4478;
}

double noise_oracle_dbm(double bandwidth_hz, double nf_db) {
  // kT at 290 K in mW/Hz, then to dBm.
  const double kt = 1.380649e-23 * 290.0 * 1000.0;
  return 10.0 * std::log10(kt * bandwidth_hz) + nf_db;
}

double capacity_oracle(double bw, double snr_db, double eff, double frac) {
  const double snr = std::pow(10.0, snr_db / 10.0);
  return eff * frac * bw * std::log1p(snr) / std::log(2.0);
}

std::vector<std::string> hop_names(const Trace& trace,
                                   const std::vector<NodeId>& hops) {
  std::vector<std::string> out;
  for (NodeId n : hops) out.push_back(trace.node_name(n));
  return out;
}

std::vector<std::string> hop_names(const Scenario& scenario,
                                   const std::vector<NodeId>& hops) {
  std::vector<std::string> out;
  for (NodeId n : hops) out.push_back(scenario.node(n).name);
  return out;
}

void shorten(Scenario& s, double duration) {
  s.duration = duration;
  for (FlowSpec& f : s.flows) f.stop = std::min(f.stop, duration);
  std::erase_if(s.flows, [](const FlowSpec& f) { return f.start >= f.stop; });
  s.assertions.clear();
}

std::vector<std::string> audit_protocol_ordering(const Trace& trace) {
  std::vector<std::string> bad;
  std::map<NodeId, std::string> ue_state;
  std::map<NodeId, std::string> f1_state;
  const auto state_of = [](const std::map<NodeId, std::string>& m, NodeId id) {
    auto it = m.find(id);
    return it == m.end() ? std::string() : it->second;
  };
  const Role upf = Role::kUpf;
  std::map<NodeId, Role> roles;
  for (const NodeRecord& n : trace.nodes) roles[n.id] = n.role;

  for (const TraceEvent& e : trace.events) {
    if (e.kind == TraceKind::kTransition) {
      if (e.entity == "ue_context") ue_state[e.node] = e.to;
      if (e.entity == "f1") f1_state[e.node] = e.to;
      continue;
    }
    if (e.flow >= 0 &&
        (e.kind == TraceKind::kForward || e.kind == TraceKind::kDeliver)) {
      const FlowRecord& f = trace.flows.at(e.flow);
      const NodeId ue = roles[f.src] == upf ? f.dst : f.src;
      if (state_of(ue_state, ue) != "Connected") {
        bad.push_back(fmt::format("t={} flow {} packet {} {} while {} is {}",
                                  e.time, f.id, e.packet, to_string(e.kind),
                                  trace.node_name(ue),
                                  state_of(ue_state, ue).empty()
                                      ? "unknown"
                                      : state_of(ue_state, ue)));
      }
    }
    if (e.flow < 0 && e.kind == TraceKind::kDeliver && e.subject.valid()) {
      const std::string s = state_of(f1_state, e.subject);
      if (s.empty() || s == "Idle" || s == "Released") {
        bad.push_back(fmt::format("t={} {} delivered on {} association of {}",
                                  e.time, e.code, s.empty() ? "no" : s,
                                  trace.node_name(e.subject)));
      }
    }
  }
  return bad;
}

std::vector<std::pair<std::string, std::uint32_t>> delivered_payloads(
    const Trace& trace) {
  std::vector<std::pair<std::string, std::uint32_t>> out;
  for (const TraceEvent& e : trace.events) {
    if (e.kind == TraceKind::kDeliver && e.flow >= 0) {
      out.emplace_back(trace.flows.at(e.flow).id, e.payload);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

namespace {

RandomCase make_case(Gen& g, bool force_iab) {
  RandomCase c;
  Scenario& s = c.scenario;
  s.name = "random";
  s.seed = g.bits() % 100000 + 1;
  s.duration = g.uniform(0.3, 0.8);
  s.engine.queue_capacity = static_cast<std::uint32_t>(g.integer(4, 256));
  c.mode = g.coin() ? PathMode::kUpfReroute : PathMode::kBapBypass;

  const NodeId cu = add_node(s, {Role::kCu, {0, -20}, {}, "cu"});
  const NodeId upf = add_node(s, {Role::kUpf, {0, -40}, {}, "upf"});
  NodeSpec du{Role::kDonorDu, {0, 0}, g.uniform(18, 22), "donor-du"};
  du.carrier = n41();
  du.carrier->bandwidth = g.coin() ? 20e6 : 10e6;
  const NodeId donor = add_node(s, du);
  LinkSpec wired;
  wired.wired_capacity = g.uniform(1e8, 1e9);
  wired.propagation_delay = g.uniform(1e-6, 1e-4);
  add_link(s, cu, donor, wired);
  wired.wired_capacity = g.uniform(1e8, 1e9);
  wired.propagation_delay = g.uniform(1e-6, 1e-4);
  add_link(s, cu, upf, wired);

  c.has_iab = force_iab || g.coin(0.7);
  const int near = g.integer(force_iab ? 0 : 1, 2);
  const int far = c.has_iab ? g.integer(1, 2) : 0;
  std::vector<NodeId> ues;
  for (int i = 0; i < near + far; ++i) {
    const bool is_far = i >= near;
    const double r = is_far ? g.uniform(7000, 9000) : g.uniform(50, 2500);
    const double a = g.uniform(-0.3, 0.3);
    ues.push_back(add_node(s, {Role::kUe, {r * std::cos(a), r * std::sin(a)},
                               g.uniform(20, 23), fmt::format("ue{}", i + 1)}));
  }
  for (std::size_t i = 0; i < ues.size(); ++i) {
    const bool is_far = static_cast<int>(i) >= near;
    const bool dl = g.coin(0.8) || (force_iab && is_far);
    const bool ul = g.coin(0.5) || !dl;
    for (int dir = 0; dir < 2; ++dir) {
      if ((dir == 0 && !dl) || (dir == 1 && !ul)) continue;
      FlowSpec f;
      f.id = fmt::format("ue{}-{}", i + 1, dir == 0 ? "dl" : "ul");
      f.src = dir == 0 ? upf : ues[i];
      f.dst = dir == 0 ? ues[i] : upf;
      f.rate = g.uniform(0.2e6, dir == 0 ? 40e6 : 10e6);
      f.packet_size = static_cast<std::uint32_t>(g.integer(200, 1400));
      f.start = g.uniform(0.0, 0.2 * s.duration);
      f.stop = g.uniform(0.6 * s.duration, s.duration);
      s.flows.push_back(f);
    }
  }
  if (c.has_iab) {
    IabNodeSpec spec;
    spec.group = "uav1";
    const double r = g.uniform(800, 2500);
    spec.position = {r, g.uniform(-200, 200)};
    spec.carrier = n78();
    spec.carrier.bandwidth = g.coin() ? 30e6 : 20e6;
    spec.mt_tx_power = 23;
    spec.du_tx_power = g.uniform(28, 33);
    RadioOverride o;
    o.pathloss_exponent = 2.0;
    spec.radio_override = o;
    instantiate_iab_node(s, spec, g.uniform(0.0, 0.2 * s.duration));
  }
  return c;
}

std::string fail(std::uint64_t seed, const std::string& why) {
  return fmt::format("case seed {}: {}", seed, why);
}

constexpr std::uint64_t kBaseSeed = 0x1ab5eedULL;

}  // namespace

RandomCase random_case(Gen& g) { return make_case(g, false); }

std::optional<std::string> prop_encapsulation_round_trip(int cases) {
  for (int i = 0; i < cases; ++i) {
    const std::uint64_t seed = kBaseSeed + i;
    Gen g(seed);
    Packet p;
    p.id = g.bits();
    p.flow = static_cast<std::uint32_t>(g.integer(0, 8));
    p.seq = g.bits() % 100000;
    p.payload_size = static_cast<std::uint32_t>(g.integer(0, 9000));
    p.created_at = g.uniform(0, 100);
    p.ttl = static_cast<std::uint32_t>(g.integer(1, 64));
    p.src = NodeId{static_cast<std::uint32_t>(g.integer(1, 20))};
    p.dst = NodeId{static_cast<std::uint32_t>(g.integer(1, 20))};
    for (int h = g.integer(0, 5); h > 0; --h) {
      p.hop_log.push_back(NodeId{static_cast<std::uint32_t>(g.integer(1, 20))});
    }
    if (g.coin()) {
      if (g.coin()) {
        p.header_stack.push_back(
            GtpHeader{{NodeId{static_cast<std::uint32_t>(g.integer(1, 20))},
                       Teid{static_cast<std::uint32_t>(g.integer(1, 1 << 30))}},
                      p.payload_size, 8});
      } else {
        p.header_stack.push_back(
            BapHeader{static_cast<std::uint32_t>(g.integer(1, 1000)), 4});
      }
    }
    Tunnel t;
    t.key = {NodeId{static_cast<std::uint32_t>(g.integer(1, 20))},
             Teid{static_cast<std::uint32_t>(g.integer(1, 1 << 30))}};
    const std::uint32_t hsize = static_cast<std::uint32_t>(g.integer(4, 16));
    const Packet enc = encapsulate(p, t, hsize);
    if (enc.depth() != p.depth() + 1) return fail(seed, "depth did not grow");
    if (enc.wire_size() != p.wire_size() + hsize) {
      return fail(seed, "wire size did not grow by the header size");
    }
    if (decapsulate(enc, t.key.teid) != p) {
      return fail(seed, "decapsulate(encapsulate(p)) != p");
    }
    // Depth 2 -> 1 keeps the inner header.
    if (p.depth() == 1) {
      const Packet once = decapsulate(enc, t.key.teid);
      if (!(once.header_stack.front() == p.header_stack.front())) {
        return fail(seed, "inner header changed");
      }
      try {
        (void)encapsulate(enc, t, hsize);
        return fail(seed, "third header accepted");
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kDepthExceeded) return fail(seed, e.what());
      }
    }
    Teid wrong{t.key.teid.value + 1};
    try {
      (void)decapsulate(enc, wrong);
      return fail(seed, "wrong TEID accepted");
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kTeidMismatch) return fail(seed, e.what());
    }
  }
  return std::nullopt;
}

std::optional<std::string> prop_nesting_depth(int cases) {
  for (int i = 0; i < cases; ++i) {
    const std::uint64_t seed = kBaseSeed + 1000 + i;
    Gen g(seed);
    RandomCase c = make_case(g, true);
    RunOptions opt;
    opt.mode = c.mode;
    Simulator sim(c.scenario, opt);
    sim.run();
    const Trace& tr = sim.trace();
    const Scenario& s = sim.scenario();
    const auto mt = s.find_node("uav1.mt");
    if (!mt) return fail(seed, "IAB node was not instantiated");
    const Link* bh = s.find_link(*s.find_node("donor-du"), *mt);
    if (!bh) return fail(seed, "no backhaul radio link");
    std::uint64_t user_on_bh = 0;
    for (const TraceEvent& e : tr.events) {
      if (e.depth > 2) return fail(seed, fmt::format("depth {} observed", e.depth));
      if (e.kind != TraceKind::kForward || e.link != bh->id || e.flow < 0) continue;
      ++user_on_bh;
      const std::size_t gtp = e.teids.size();
      const std::size_t bap = e.depth - gtp;
      const bool ok = c.mode == PathMode::kUpfReroute ? (gtp == 2 && bap == 0)
                                                      : (gtp == 1 && bap == 1);
      if (!ok) {
        return fail(seed, fmt::format("{} mode: {} GTP + {} BAP on backhaul",
                                      to_string(c.mode), gtp, bap));
      }
    }
    if (user_on_bh == 0) return fail(seed, "no user traffic crossed the backhaul");
    const LinkDirection* down = sim.link_direction(bh->id, bh->a);
    const LinkDirection* up = sim.link_direction(bh->id, bh->b);
    std::uint32_t max_depth = 0;
    for (const LinkDirection* d : {down, up}) {
      if (d) max_depth = std::max(max_depth, d->max_depth);
    }
    if (max_depth != 2) {
      return fail(seed, fmt::format("backhaul max depth {}", max_depth));
    }
  }
  return std::nullopt;
}

std::optional<std::string> prop_conservation(int cases) {
  for (int i = 0; i < cases; ++i) {
    const std::uint64_t seed = kBaseSeed + 2000 + i;
    Gen g(seed);
    RandomCase c = random_case(g);
    RunOptions opt;
    opt.mode = c.mode;
    const Trace tr = run(c.scenario, opt);
    std::vector<std::uint64_t> inj(tr.flows.size()), del(tr.flows.size()),
        drp(tr.flows.size());
    for (const TraceEvent& e : tr.events) {
      if (e.flow < 0) continue;
      if (e.kind == TraceKind::kInject) inj[e.flow]++;
      if (e.kind == TraceKind::kDeliver) del[e.flow]++;
      if (e.kind == TraceKind::kDrop) drp[e.flow]++;
    }
    for (std::size_t f = 0; f < tr.flows.size(); ++f) {
      const FlowSummary& sm = tr.flow_summaries.at(f);
      if (sm.injected != inj[f] || sm.delivered != del[f] ||
          sm.drop_count != drp[f]) {
        return fail(seed, fmt::format("flow {}: summary disagrees with events",
                                      sm.flow_id));
      }
      if (inj[f] != del[f] + drp[f] + sm.in_flight) {
        return fail(seed, fmt::format("flow {}: injected {} != {} + {} + {}",
                                      sm.flow_id, inj[f], del[f], drp[f],
                                      sm.in_flight));
      }
    }
  }
  return std::nullopt;
}

std::optional<std::string> prop_throughput_bound(int cases) {
  for (int i = 0; i < cases; ++i) {
    const std::uint64_t seed = kBaseSeed + 3000 + i;
    Gen g(seed);
    RandomCase c = random_case(g);
    c.scenario.duration = g.uniform(1.0, 2.0);
    for (FlowSpec& f : c.scenario.flows) f.stop = c.scenario.duration;
    RunOptions opt;
    opt.mode = c.mode;
    Simulator sim(c.scenario, opt);
    sim.run();
    const Trace tr = sim.finish();
    const Scenario& s = sim.scenario();
    for (std::size_t f = 0; f < tr.flows.size(); ++f) {
      const FlowRecord& fr = tr.flows[f];
      // Bottleneck over every link direction the flow's packets crossed.
      double bottleneck = INFINITY;
      bool any = false;
      for (const TraceEvent& e : tr.events) {
        if (e.kind != TraceKind::kDeliver || e.flow != static_cast<int>(f)) continue;
        any = true;
        std::vector<NodeId> hops{fr.src};
        hops.insert(hops.end(), e.hop_log.begin(), e.hop_log.end());
        hops.push_back(fr.dst);
        for (std::size_t h = 0; h + 1 < hops.size(); ++h) {
          const Link* l = s.find_link(hops[h], hops[h + 1]);
          if (!l) return fail(seed, "delivered over a missing link");
          bottleneck = std::min(
              bottleneck, link_capacity(s, *l, direction_of(s, *l, hops[h])));
        }
        break;
      }
      if (!any) continue;
      const double min_window = 100.0 * 8.0 * fr.packet_size / bottleneck;
      if (min_window > s.duration) continue;
      for (int w = 0; w < 5; ++w) {
        const double len = g.uniform(min_window, s.duration);
        const double t0 = g.uniform(0.0, s.duration - len);
        const double got = measure_throughput(tr, fr.id, t0, t0 + len);
        if (got > bottleneck * 1.01) {
          return fail(seed, fmt::format("flow {} [{}, {}): {} > bottleneck {}",
                                        fr.id, t0, t0 + len, got, bottleneck));
        }
      }
    }
  }
  return std::nullopt;
}

std::optional<std::string> prop_capacity_monotonic(int cases) {
  for (int i = 0; i < cases; ++i) {
    const std::uint64_t seed = kBaseSeed + 4000 + i;
    Gen g(seed);
    Scenario s;
    NodeSpec du{Role::kDonorDu, {0, 0}, g.uniform(0, 40), "du"};
    du.carrier = Carrier{"x", g.uniform(0.5e9, 6e9), g.uniform(5e6, 100e6), 30e3};
    const NodeId d = add_node(s, du);
    const NodeId u =
        add_node(s, {Role::kUe, {g.uniform(1, 5000), 0}, g.uniform(0, 30), "ue"});
    s.radio_defaults.pathloss_exponent = g.uniform(2.0, 4.0);
    s.radio_defaults.efficiency = g.uniform(0.1, 0.9);
    LinkSpec radio;
    radio.medium = Medium::kRadio;
    radio.carrier = du.carrier;
    const LinkId lid = add_link(s, d, u, radio);
    const Direction dir = g.coin() ? Direction::kDownlink : Direction::kUplink;
    const auto cap = [&](const Scenario& x) {
      return link_capacity(x, *x.find_link(lid), dir);
    };
    const double base = cap(s);

    Scenario far = s;
    far.node(u).position.x += g.uniform(0.1, 2000);
    if (cap(far) > base) return fail(seed, "capacity grew with distance");

    Scenario loud = s;
    const NodeId tx = dir == Direction::kDownlink ? d : u;
    *loud.node(tx).tx_power += g.uniform(0.1, 10);
    if (cap(loud) < base) return fail(seed, "capacity fell with tx power");

    Scenario wide = s;
    wide.find_link(lid)->carrier->bandwidth *= g.uniform(1.01, 3.0);
    if (cap(wide) < base) return fail(seed, "capacity fell with bandwidth");

    Scenario eff = s;
    eff.radio_defaults.efficiency =
        std::min(1.0, eff.radio_defaults.efficiency + g.uniform(0.01, 0.1));
    if (cap(eff) < base) return fail(seed, "capacity fell with efficiency");
  }
  return std::nullopt;
}

std::optional<std::string> prop_trace_determinism(int cases) {
  for (int i = 0; i < cases; ++i) {
    const std::uint64_t seed = kBaseSeed + 5000 + i;
    Gen g(seed);
    RandomCase c = random_case(g);
    RunOptions opt;
    opt.mode = c.mode;
    const std::uint64_t a = trace_hash(run(c.scenario, opt));
    const std::uint64_t b = trace_hash(run(c.scenario, opt));
    if (a != b) return fail(seed, fmt::format("hash {:x} != {:x}", a, b));
  }
  return std::nullopt;
}

}  // namespace iab::testing
