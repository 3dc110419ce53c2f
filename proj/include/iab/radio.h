#pragma once

#include <functional>
#include <optional>

#include "iab/radio_params.h"
#include "iab/topology.h"

namespace iab {

inline constexpr double kSpeedOfLight = 299792458.0;

enum class Direction { kDownlink, kUplink };

std::string_view to_string(Direction d);

struct LinkBudget {
  double pathloss = 0.0;     // dB
  double rx_power = 0.0;     // dBm
  double noise_power = 0.0;  // dBm
  double snr = 0.0;          // dB
};

// Log-distance model anchored at free space at the reference distance.
// Throws TooClose below the reference distance.
double path_loss(const Carrier& carrier, double distance,
                 const RadioParams& params);

double noise_power(double bandwidth, const RadioParams& params);

// Distances below the reference distance are evaluated at the reference
// distance, so co-located nodes stay usable.
LinkBudget link_budget(const Carrier& carrier, double tx_power, double distance,
                       const RadioParams& params);

double shannon_capacity(double bandwidth, double snr_db, double efficiency,
                        double time_fraction);

// defaults, then each endpoint's override, then the link's own override.
RadioParams effective_params(const Scenario& scenario, NodeId a, NodeId b,
                             const Link* link = nullptr);

// Budget of a radio link for a transmission from tx to the other endpoint.
LinkBudget link_budget(const Scenario& scenario, const Link& link, NodeId tx);
double snr(const Scenario& scenario, const Link& link, NodeId tx);

// Downlink when the transmitter is the DU side of a radio link. Wired links
// report kDownlink when sending from endpoint a.
Direction direction_of(const Scenario& scenario, const Link& link, NodeId from);

// Received power at `terminal` from `du`'s advertised carrier.
double downlink_rx_power(const Scenario& scenario, NodeId terminal, NodeId du);
bool is_covered(const Scenario& scenario, NodeId terminal, NodeId du);

double link_capacity(const Scenario& scenario, const Link& link,
                     Direction direction);

// Covering DU with the strongest received power; ties go to the lower id.
std::optional<NodeId> best_covering_du(
    const Scenario& scenario, NodeId terminal,
    const std::function<bool(const Node&)>& eligible);

}  // namespace iab
