#pragma once

#include <optional>
#include <string>
#include <vector>

namespace iab {

// Propagation and capacity knobs. Defaults are the calibrated values used by
// the bundled scenarios unless a scenario's radio_defaults overrides them.
struct RadioParams {
  double pathloss_exponent = 2.2;
  double reference_distance = 1.0;        // m
  double noise_figure = 7.0;              // dB
  double thermal_noise_density = -174.0;  // dBm/Hz
  double coverage_rsrp_threshold = -100.0;  // dBm
  double efficiency = 0.55;
  double tdd_dl_fraction = 0.7;

  std::vector<std::string> violations() const;
};

// Partial RadioParams; set fields replace the base value.
struct RadioOverride {
  std::optional<double> pathloss_exponent;
  std::optional<double> reference_distance;
  std::optional<double> noise_figure;
  std::optional<double> thermal_noise_density;
  std::optional<double> coverage_rsrp_threshold;
  std::optional<double> efficiency;
  std::optional<double> tdd_dl_fraction;

  RadioParams applied_to(RadioParams base) const;
};

}  // namespace iab
