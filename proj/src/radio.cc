#include "iab/radio.h"

#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "iab/error.h"

namespace iab {

std::vector<std::string> RadioParams::violations() const {
  std::vector<std::string> out;
  auto finite = [&](const char* name, double v) {
    if (!std::isfinite(v)) out.push_back(fmt::format("{} is not finite", name));
  };
  finite("noise_figure", noise_figure);
  finite("thermal_noise_density", thermal_noise_density);
  finite("coverage_rsrp_threshold", coverage_rsrp_threshold);
  if (!std::isfinite(pathloss_exponent) || pathloss_exponent <= 0) {
    out.push_back("pathloss_exponent must be positive");
  }
  if (!std::isfinite(reference_distance) || reference_distance <= 0) {
    out.push_back("reference_distance must be positive");
  }
  if (!(efficiency > 0 && efficiency <= 1)) {
    out.push_back(fmt::format("efficiency {} outside (0, 1]", efficiency));
  }
  if (!(tdd_dl_fraction > 0 && tdd_dl_fraction <= 1)) {
    out.push_back(
        fmt::format("tdd_dl_fraction {} outside (0, 1]", tdd_dl_fraction));
  }
  return out;
}

RadioParams RadioOverride::applied_to(RadioParams base) const {
  if (pathloss_exponent) base.pathloss_exponent = *pathloss_exponent;
  if (reference_distance) base.reference_distance = *reference_distance;
  if (noise_figure) base.noise_figure = *noise_figure;
  if (thermal_noise_density) base.thermal_noise_density = *thermal_noise_density;
  if (coverage_rsrp_threshold) {
    base.coverage_rsrp_threshold = *coverage_rsrp_threshold;
  }
  if (efficiency) base.efficiency = *efficiency;
  if (tdd_dl_fraction) base.tdd_dl_fraction = *tdd_dl_fraction;
  return base;
}

std::string_view to_string(Direction d) {
  return d == Direction::kDownlink ? "downlink" : "uplink";
}

double path_loss(const Carrier& carrier, double distance,
                 const RadioParams& params) {
  const double d0 = params.reference_distance;
  if (!(distance >= d0)) {
    throw Error(ErrorCode::kTooClose,
                fmt::format("distance {} m below reference {} m", distance, d0));
  }
  const double f = carrier.center_frequency;
  return 20.0 * std::log10(4.0 * std::numbers::pi * d0 * f / kSpeedOfLight) +
         10.0 * params.pathloss_exponent * std::log10(distance / d0);
}

double noise_power(double bandwidth, const RadioParams& params) {
  return params.thermal_noise_density + 10.0 * std::log10(bandwidth) +
         params.noise_figure;
}

LinkBudget link_budget(const Carrier& carrier, double tx_power, double distance,
                       const RadioParams& params) {
  LinkBudget b;
  b.pathloss =
      path_loss(carrier, std::max(distance, params.reference_distance), params);
  b.rx_power = tx_power - b.pathloss;
  b.noise_power = noise_power(carrier.bandwidth, params);
  b.snr = b.rx_power - b.noise_power;
  return b;
}

double shannon_capacity(double bandwidth, double snr_db, double efficiency,
                        double time_fraction) {
  const double snr_linear = std::pow(10.0, snr_db / 10.0);
  // log1p keeps tiny SNRs from rounding to 0 unevenly
  return efficiency * time_fraction * bandwidth * std::log1p(snr_linear) /
         std::numbers::ln2;
}

RadioParams effective_params(const Scenario& scenario, NodeId a, NodeId b,
                             const Link* link) {
  RadioParams p = scenario.radio_defaults;
  for (NodeId id : {a, b}) {
    const Node& n = scenario.node(id);
    if (n.radio_override) p = n.radio_override->applied_to(p);
  }
  if (link && link->radio_override) p = link->radio_override->applied_to(p);
  return p;
}

LinkBudget link_budget(const Scenario& scenario, const Link& link, NodeId tx) {
  if (link.medium != Medium::kRadio || !link.carrier) {
    throw Error(ErrorCode::kInvalidArgument,
                fmt::format("link #{} is not a radio link", link.id.value));
  }
  const Node& t = scenario.node(tx);
  const Node& r = scenario.node(link.other(tx));
  if (!t.tx_power) {
    throw Error(ErrorCode::kInvalidArgument,
                fmt::format("{} has no tx_power", t.name));
  }
  return link_budget(*link.carrier, *t.tx_power, distance(t.position, r.position),
                     effective_params(scenario, link.a, link.b, &link));
}

double snr(const Scenario& scenario, const Link& link, NodeId tx) {
  return link_budget(scenario, link, tx).snr;
}

Direction direction_of(const Scenario& scenario, const Link& link, NodeId from) {
  if (link.medium == Medium::kRadio) {
    return is_du(scenario.node(from).role) ? Direction::kDownlink
                                           : Direction::kUplink;
  }
  return from == link.a ? Direction::kDownlink : Direction::kUplink;
}

double downlink_rx_power(const Scenario& scenario, NodeId terminal, NodeId du) {
  const Node& d = scenario.node(du);
  const Node& t = scenario.node(terminal);
  if (!d.carrier || !d.tx_power) {
    throw Error(ErrorCode::kMissingCarrier,
                fmt::format("DU {} advertises no carrier", d.name));
  }
  const Link* link = scenario.find_link(du, terminal);
  const RadioParams params = effective_params(scenario, du, terminal, link);
  return link_budget(*d.carrier, *d.tx_power, distance(d.position, t.position),
                     params)
      .rx_power;
}

bool is_covered(const Scenario& scenario, NodeId terminal, NodeId du) {
  const Link* link = scenario.find_link(du, terminal);
  const RadioParams params = effective_params(scenario, du, terminal, link);
  return downlink_rx_power(scenario, terminal, du) >=
         params.coverage_rsrp_threshold;
}

double link_capacity(const Scenario& scenario, const Link& link,
                     Direction direction) {
  if (link.medium == Medium::kWired) return link.wired_capacity;
  const NodeId du = is_du(scenario.node(link.a).role) ? link.a : link.b;
  const NodeId tx = direction == Direction::kDownlink ? du : link.other(du);
  const RadioParams params = effective_params(scenario, link.a, link.b, &link);
  const double fraction = direction == Direction::kDownlink
                              ? params.tdd_dl_fraction
                              : 1.0 - params.tdd_dl_fraction;
  return shannon_capacity(link.carrier->bandwidth,
                          link_budget(scenario, link, tx).snr,
                          params.efficiency, fraction);
}

std::optional<NodeId> best_covering_du(
    const Scenario& scenario, NodeId terminal,
    const std::function<bool(const Node&)>& eligible) {
  std::optional<NodeId> best;
  double best_rx = 0.0;
  for (const Node& n : scenario.nodes()) {
    if (!is_du(n.role) || !n.carrier || !eligible(n)) continue;
    if (!is_covered(scenario, terminal, n.id)) continue;
    const double rx = downlink_rx_power(scenario, terminal, n.id);
    if (!best || rx > best_rx) {
      best = n.id;
      best_rx = rx;
    }
  }
  return best;
}

}  // namespace iab
