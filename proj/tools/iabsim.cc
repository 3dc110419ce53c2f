#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "iab/cli.h"

int main(int argc, char** argv) {
  CLI::App app{"iabsim - discrete-event simulator for 5G IAB with an aerial DU"};
  app.require_subcommand(1);

  std::string validate_path;
  auto* validate = app.add_subcommand("validate", "Check a scenario file");
  validate->add_option("scenario", validate_path, "Scenario YAML")->required();

  iab::RunConfig config;
  std::string mode = "upf";
  std::string level = "summary";
  std::uint64_t seed = 0;
  auto* run = app.add_subcommand("run", "Run a scenario and write artifacts");
  run->add_option("scenario", config.scenario_path, "Scenario YAML")->required();
  run->add_option("--mode", mode, "upf | bap")
      ->check(CLI::IsMember({"upf", "bap", "upf-reroute", "bap-bypass",
                             "UpfReroute", "BapBypass"}));
  auto* seed_opt = run->add_option("--seed", seed, "Override the scenario seed");
  run->add_option("--out", config.output_dir, "Output directory");
  run->add_option("--trace-level", level, "summary | full")
      ->check(CLI::IsMember({"summary", "full"}));

  std::string trace_a;
  std::string trace_b;
  auto* compare = app.add_subcommand("compare", "Diff two trace files");
  compare->add_option("trace_a", trace_a)->required();
  compare->add_option("trace_b", trace_b)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : iab::kExitError;
  }

  if (*validate) return iab::cmd_validate(validate_path, std::cout, std::cerr);
  if (*run) {
    config.mode = *iab::parse_path_mode(mode);
    config.trace_level = *iab::parse_trace_level(level);
    if (*seed_opt) config.seed_override = seed;
    return iab::cmd_run(config, std::cout, std::cerr);
  }
  return iab::cmd_compare(trace_a, trace_b, std::cout, std::cerr);
}
