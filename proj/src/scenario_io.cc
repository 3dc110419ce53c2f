#include "iab/scenario_io.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <limits>
#include <map>
#include <sstream>

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include "iab/error.h"
#include "iab/radio.h"

namespace iab {
namespace {

class Reader {
 public:
  explicit Reader(std::string_view source) : source_(source) {}

  [[noreturn]] void fail(const YAML::Node& at, const std::string& what) const {
    const int line = at.Mark().line;
    throw Error(ErrorCode::kParseError,
                line >= 0 ? fmt::format("{}:{}: {}", source_, line + 1, what)
                          : fmt::format("{}: {}", source_, what));
  }

  void expect_map(const YAML::Node& n, std::string_view what) const {
    if (!n.IsMap()) fail(n, fmt::format("{} must be a mapping", what));
  }

  void only_keys(const YAML::Node& n, std::string_view what,
                 std::initializer_list<std::string_view> allowed) const {
    expect_map(n, what);
    for (const auto& kv : n) {
      const std::string key = kv.first.as<std::string>();
      if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
        fail(kv.first, fmt::format("unknown key '{}' in {}", key, what));
      }
    }
  }

  YAML::Node require(const YAML::Node& n, std::string_view key,
                     std::string_view what) const {
    YAML::Node v = n[std::string(key)];
    if (!v) fail(n, fmt::format("{} is missing '{}'", what, key));
    return v;
  }

  double number(const YAML::Node& n, std::string_view field) const {
    if (!n.IsScalar()) fail(n, fmt::format("'{}' must be a number", field));
    try {
      return n.as<double>();
    } catch (const YAML::Exception&) {
      fail(n, fmt::format("'{}' must be a number, got '{}'", field,
                          n.Scalar()));
    }
  }

  std::uint64_t integer(const YAML::Node& n, std::string_view field) const {
    if (!n.IsScalar()) fail(n, fmt::format("'{}' must be an integer", field));
    try {
      return n.as<std::uint64_t>();
    } catch (const YAML::Exception&) {
      fail(n, fmt::format("'{}' must be a non-negative integer, got '{}'",
                          field, n.Scalar()));
    }
  }

  std::string text(const YAML::Node& n, std::string_view field) const {
    if (!n.IsScalar()) fail(n, fmt::format("'{}' must be a string", field));
    return n.Scalar();
  }

  Position position(const YAML::Node& n) const {
    if (!n.IsSequence() || n.size() != 2) {
      fail(n, "'position' must be a two-element list [x, y]");
    }
    return Position{number(n[0], "position"), number(n[1], "position")};
  }

  Carrier carrier(const YAML::Node& n) const {
    if (n.IsScalar()) {
      auto it = carriers_.find(n.Scalar());
      if (it == carriers_.end()) {
        fail(n, fmt::format("unknown carrier '{}'", n.Scalar()));
      }
      return it->second;
    }
    only_keys(n, "carrier",
              {"band_label", "center_frequency", "bandwidth", "scs"});
    Carrier c;
    if (n["band_label"]) c.band_label = text(n["band_label"], "band_label");
    c.center_frequency =
        number(require(n, "center_frequency", "carrier"), "center_frequency");
    c.bandwidth = number(require(n, "bandwidth", "carrier"), "bandwidth");
    if (n["scs"]) c.scs = number(n["scs"], "scs");
    return c;
  }

  void radio_fields(const YAML::Node& n, RadioParams& p) const {
    only_keys(n, "radio parameters",
              {"pathloss_exponent", "reference_distance", "noise_figure",
               "thermal_noise_density", "coverage_rsrp_threshold", "efficiency",
               "tdd_dl_fraction"});
    auto set = [&](const char* key, double& field) {
      if (n[key]) field = number(n[key], key);
    };
    set("pathloss_exponent", p.pathloss_exponent);
    set("reference_distance", p.reference_distance);
    set("noise_figure", p.noise_figure);
    set("thermal_noise_density", p.thermal_noise_density);
    set("coverage_rsrp_threshold", p.coverage_rsrp_threshold);
    set("efficiency", p.efficiency);
    set("tdd_dl_fraction", p.tdd_dl_fraction);
  }

  RadioOverride radio_override(const YAML::Node& n) const {
    only_keys(n, "radio_override",
              {"pathloss_exponent", "reference_distance", "noise_figure",
               "thermal_noise_density", "coverage_rsrp_threshold", "efficiency",
               "tdd_dl_fraction"});
    RadioOverride o;
    auto set = [&](const char* key, std::optional<double>& field) {
      if (n[key]) field = number(n[key], key);
    };
    set("pathloss_exponent", o.pathloss_exponent);
    set("reference_distance", o.reference_distance);
    set("noise_figure", o.noise_figure);
    set("thermal_noise_density", o.thermal_noise_density);
    set("coverage_rsrp_threshold", o.coverage_rsrp_threshold);
    set("efficiency", o.efficiency);
    set("tdd_dl_fraction", o.tdd_dl_fraction);
    return o;
  }

  NodeId node_ref(const Scenario& s, const YAML::Node& n,
                  std::string_view field) const {
    const std::string name = text(n, field);
    const auto id = s.find_node(name);
    if (!id) fail(n, fmt::format("'{}' refers to unknown node '{}'", field, name));
    return *id;
  }

  std::map<std::string, Carrier> carriers_;

 private:
  std::string source_;
};

void read_nodes(const Reader& r, const YAML::Node& list, Scenario& s) {
  if (!list.IsSequence()) r.fail(list, "'nodes' must be a list");
  for (const YAML::Node& n : list) {
    r.only_keys(n, "node",
                {"name", "role", "position", "tx_power", "owner_group",
                 "carrier", "radio_override"});
    Node node;
    const YAML::Node role = r.require(n, "role", "node");
    const auto parsed = parse_role(r.text(role, "role"));
    if (!parsed) {
      r.fail(role, fmt::format("unknown role '{}' (CU, DonorDU, IabMt, IabDu, "
                               "Ue, Upf)",
                               role.Scalar()));
    }
    node.role = *parsed;
    if (n["name"]) {
      node.name = r.text(n["name"], "name");
      if (s.find_node(node.name)) {
        r.fail(n["name"], fmt::format("duplicate node name '{}'", node.name));
      }
    }
    node.position = r.position(r.require(n, "position", "node"));
    if (n["tx_power"]) node.tx_power = r.number(n["tx_power"], "tx_power");
    if (n["owner_group"]) {
      node.owner_group = r.text(n["owner_group"], "owner_group");
    }
    if (n["carrier"]) node.carrier = r.carrier(n["carrier"]);
    if (n["radio_override"]) {
      node.radio_override = r.radio_override(n["radio_override"]);
    }
    s.insert_node(std::move(node));
  }
}

void read_links(const Reader& r, const YAML::Node& list, Scenario& s) {
  if (!list.IsSequence()) r.fail(list, "'links' must be a list");
  for (const YAML::Node& n : list) {
    r.only_keys(n, "link",
                {"endpoints", "medium", "carrier", "wired_capacity",
                 "propagation_delay", "radio_override"});
    const YAML::Node ends = r.require(n, "endpoints", "link");
    if (!ends.IsSequence() || ends.size() != 2) {
      r.fail(ends, "'endpoints' must be a two-element list of node names");
    }
    Link link;
    link.a = r.node_ref(s, ends[0], "endpoints");
    link.b = r.node_ref(s, ends[1], "endpoints");
    const YAML::Node medium = r.require(n, "medium", "link");
    const std::string m = r.text(medium, "medium");
    if (m == "Wired" || m == "wired") {
      link.medium = Medium::kWired;
    } else if (m == "Radio" || m == "radio") {
      link.medium = Medium::kRadio;
    } else {
      r.fail(medium, fmt::format("unknown medium '{}' (Wired, Radio)", m));
    }
    if (n["carrier"]) link.carrier = r.carrier(n["carrier"]);
    if (n["radio_override"]) {
      link.radio_override = r.radio_override(n["radio_override"]);
    }
    const Role ra = s.node(link.a).role;
    const Role rb = s.node(link.b).role;
    const bool internal = (ra == Role::kIabMt && rb == Role::kIabDu) ||
                          (ra == Role::kIabDu && rb == Role::kIabMt);
    if (n["wired_capacity"]) {
      link.wired_capacity = r.number(n["wired_capacity"], "wired_capacity");
    } else if (link.medium == Medium::kWired && internal) {
      link.wired_capacity = std::numeric_limits<double>::infinity();
    }
    if (n["propagation_delay"]) {
      link.propagation_delay =
          r.number(n["propagation_delay"], "propagation_delay");
    } else if (link.medium == Medium::kRadio) {
      link.propagation_delay =
          distance(s.node(link.a).position, s.node(link.b).position) /
          kSpeedOfLight;
    }
    s.insert_link(std::move(link));
  }
}

void read_flows(const Reader& r, const YAML::Node& list, Scenario& s) {
  if (!list.IsSequence()) r.fail(list, "'flows' must be a list");
  for (const YAML::Node& n : list) {
    r.only_keys(n, "flow",
                {"id", "src", "dst", "rate", "packet_size", "start", "stop"});
    FlowSpec f;
    f.id = r.text(r.require(n, "id", "flow"), "id");
    f.src = r.node_ref(s, r.require(n, "src", "flow"), "src");
    f.dst = r.node_ref(s, r.require(n, "dst", "flow"), "dst");
    f.rate = r.number(r.require(n, "rate", "flow"), "rate");
    if (n["packet_size"]) {
      f.packet_size =
          static_cast<std::uint32_t>(r.integer(n["packet_size"], "packet_size"));
    }
    f.start = n["start"] ? r.number(n["start"], "start") : 0.0;
    f.stop = n["stop"] ? r.number(n["stop"], "stop") : s.duration;
    s.flows.push_back(std::move(f));
  }
}

void read_schedule(const Reader& r, const YAML::Node& list, Scenario& s) {
  if (!list.IsSequence()) r.fail(list, "'schedule' must be a list");
  for (const YAML::Node& n : list) {
    r.expect_map(n, "schedule entry");
    const std::string action =
        r.text(r.require(n, "action", "schedule entry"), "action");
    const double at = r.number(r.require(n, "at", "schedule entry"), "at");
    if (action == "instantiate_iab_node") {
      r.only_keys(n, "instantiate_iab_node",
                  {"at", "action", "group", "position", "carrier", "mt_tx_power",
                   "du_tx_power", "radio_override"});
      InstantiateIabNode d;
      d.at = at;
      d.group = r.text(r.require(n, "group", action), "group");
      d.position = r.position(r.require(n, "position", action));
      d.carrier = r.carrier(r.require(n, "carrier", action));
      if (n["mt_tx_power"]) d.mt_tx_power = r.number(n["mt_tx_power"], "mt_tx_power");
      if (n["du_tx_power"]) d.du_tx_power = r.number(n["du_tx_power"], "du_tx_power");
      if (n["radio_override"]) d.radio_override = r.radio_override(n["radio_override"]);
      s.schedule.push_back(std::move(d));
    } else if (action == "du_config_update") {
      r.only_keys(n, "du_config_update", {"at", "action", "du", "carrier"});
      UpdateDuCarrier d;
      d.at = at;
      d.du = r.text(r.require(n, "du", action), "du");
      d.carrier = r.carrier(r.require(n, "carrier", action));
      s.schedule.push_back(std::move(d));
    } else if (action == "remove_link") {
      r.only_keys(n, "remove_link", {"at", "action", "endpoints"});
      const YAML::Node ends = r.require(n, "endpoints", action);
      if (!ends.IsSequence() || ends.size() != 2) {
        r.fail(ends, "'endpoints' must be a two-element list of node names");
      }
      RemoveLink d;
      d.at = at;
      d.a = r.text(ends[0], "endpoints");
      d.b = r.text(ends[1], "endpoints");
      s.schedule.push_back(std::move(d));
    } else {
      r.fail(n["action"],
             fmt::format("unknown action '{}' (instantiate_iab_node, "
                         "du_config_update, remove_link)",
                         action));
    }
  }
}

void read_assertions(const Reader& r, const YAML::Node& list, Scenario& s) {
  if (!list.IsSequence()) r.fail(list, "'assertions' must be a list");
  for (const YAML::Node& n : list) {
    r.only_keys(n, "assertion", {"flow", "metric", "window", "min", "max"});
    Assertion a;
    a.flow = r.text(r.require(n, "flow", "assertion"), "flow");
    const YAML::Node metric = r.require(n, "metric", "assertion");
    a.metric = r.text(metric, "metric");
    if (std::find(std::begin(kAssertionMetrics), std::end(kAssertionMetrics),
                  a.metric) == std::end(kAssertionMetrics)) {
      r.fail(metric, fmt::format("unknown metric '{}'", a.metric));
    }
    if (n["window"]) {
      const YAML::Node w = n["window"];
      if (!w.IsSequence() || w.size() != 2) {
        r.fail(w, "'window' must be a two-element list [t0, t1]");
      }
      a.window = std::pair{r.number(w[0], "window"), r.number(w[1], "window")};
      if (!(a.window->second > a.window->first)) r.fail(w, "'window' is empty");
    }
    if (n["min"]) a.min = r.number(n["min"], "min");
    if (n["max"]) a.max = r.number(n["max"], "max");
    if (!a.min && !a.max) r.fail(n, "assertion needs 'min' and/or 'max'");
    const bool known = std::any_of(s.flows.begin(), s.flows.end(),
                                   [&](const FlowSpec& f) { return f.id == a.flow; });
    if (!known) r.fail(n["flow"], fmt::format("unknown flow '{}'", a.flow));
    s.assertions.push_back(std::move(a));
  }
}

}  // namespace

Scenario parse_scenario(std::string_view text, std::string_view source) {
  Reader r(source);
  YAML::Node root;
  try {
    root = YAML::Load(std::string(text));
  } catch (const YAML::ParserException& e) {
    throw Error(ErrorCode::kParseError,
                fmt::format("{}:{}: {}", source, e.mark.line + 1, e.msg));
  }
  r.only_keys(root, "scenario",
              {"name", "seed", "duration", "radio_defaults", "engine",
               "carriers", "nodes", "links", "flows", "schedule",
               "assertions"});
  Scenario s;
  if (root["name"]) s.name = r.text(root["name"], "name");
  if (root["seed"]) s.seed = r.integer(root["seed"], "seed");
  s.duration = r.number(r.require(root, "duration", "scenario"), "duration");
  if (root["radio_defaults"]) r.radio_fields(root["radio_defaults"], s.radio_defaults);
  if (const YAML::Node e = root["engine"]) {
    r.only_keys(e, "engine",
                {"gtp_header_size", "bap_header_size", "control_message_size",
                 "queue_capacity", "ttl"});
    auto set = [&](const char* key, std::uint32_t& field) {
      if (e[key]) field = static_cast<std::uint32_t>(r.integer(e[key], key));
    };
    set("gtp_header_size", s.engine.gtp_header_size);
    set("bap_header_size", s.engine.bap_header_size);
    set("control_message_size", s.engine.control_message_size);
    set("queue_capacity", s.engine.queue_capacity);
    set("ttl", s.engine.ttl);
  }
  if (const YAML::Node c = root["carriers"]) {
    r.expect_map(c, "carriers");
    for (const auto& kv : c) {
      r.carriers_[kv.first.as<std::string>()] = r.carrier(kv.second);
    }
  }
  read_nodes(r, r.require(root, "nodes", "scenario"), s);
  if (root["links"]) read_links(r, root["links"], s);
  if (root["flows"]) read_flows(r, root["flows"], s);
  if (root["schedule"]) read_schedule(r, root["schedule"], s);
  if (root["assertions"]) read_assertions(r, root["assertions"], s);
  return s;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, fmt::format("cannot read {}", path));
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str(), path);
}

}  // namespace iab
