#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "iab/ids.h"
#include "iab/radio_params.h"

namespace iab {

enum class Role { kCu, kDonorDu, kIabMt, kIabDu, kUe, kUpf };

std::string_view to_string(Role role);
std::optional<Role> parse_role(std::string_view text);

inline bool is_du(Role r) { return r == Role::kDonorDu || r == Role::kIabDu; }
// UE-like roles that attach to a DU over the air.
inline bool is_terminal(Role r) { return r == Role::kUe || r == Role::kIabMt; }
inline bool is_radio_capable(Role r) { return is_du(r) || is_terminal(r); }

struct Position {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Position&, const Position&) = default;
};

double distance(Position a, Position b);

struct Carrier {
  std::string band_label;
  double center_frequency = 0.0;  // Hz
  double bandwidth = 0.0;         // Hz
  double scs = 30e3;              // Hz

  std::vector<std::string> violations() const;
  friend bool operator==(const Carrier&, const Carrier&) = default;
};

struct Node {
  NodeId id;
  std::string name;
  Role role = Role::kUe;
  Position position;
  std::optional<double> tx_power;  // dBm, radio-capable roles only
  std::optional<std::string> owner_group;
  // Cell carrier advertised by a DU.
  std::optional<Carrier> carrier;
  // Applied to every radio link this node terminates.
  std::optional<RadioOverride> radio_override;
};

enum class Medium { kWired, kRadio };

std::string_view to_string(Medium medium);

struct Link {
  LinkId id;
  NodeId a;
  NodeId b;
  Medium medium = Medium::kWired;
  std::optional<Carrier> carrier;  // radio only
  double wired_capacity = 0.0;     // bit/s, wired only
  double propagation_delay = 0.0;  // s
  std::optional<RadioOverride> radio_override;

  bool connects(NodeId x, NodeId y) const {
    return (a == x && b == y) || (a == y && b == x);
  }
  NodeId other(NodeId x) const { return x == a ? b : a; }
};

struct FlowSpec {
  std::string id;
  NodeId src;
  NodeId dst;
  double rate = 0.0;                 // bit/s offered
  std::uint32_t packet_size = 1400;  // bytes
  double start = 0.0;
  double stop = 0.0;
};

struct InstantiateIabNode {
  double at = 0.0;
  std::string group;
  Position position;
  Carrier carrier;  // access carrier of the aerial DU
  double mt_tx_power = 23.0;
  double du_tx_power = 30.0;
  std::optional<RadioOverride> radio_override;
};

struct UpdateDuCarrier {
  double at = 0.0;
  std::string du;
  Carrier carrier;
};

struct RemoveLink {
  double at = 0.0;
  std::string a;
  std::string b;
};

using Directive = std::variant<InstantiateIabNode, UpdateDuCarrier, RemoveLink>;

double directive_time(const Directive& d);
std::string_view directive_name(const Directive& d);

struct EngineConfig {
  std::uint32_t gtp_header_size = 8;
  std::uint32_t bap_header_size = 4;
  std::uint32_t control_message_size = 64;
  std::uint32_t queue_capacity = 256;
  std::uint32_t ttl = 16;
};

// Optional pass/fail checks carried by a scenario file.
struct Assertion {
  std::string flow;
  std::string metric;  // goodput_bps | mean_latency_s | drop_count | delivered
  std::optional<std::pair<double, double>> window;
  std::optional<double> min;
  std::optional<double> max;
};

class Scenario {
 public:
  std::string name = "unnamed";
  RadioParams radio_defaults;
  EngineConfig engine;
  std::uint64_t seed = 1;
  double duration = 10.0;
  std::vector<FlowSpec> flows;
  std::vector<Directive> schedule;
  std::vector<Assertion> assertions;

  const std::vector<Node>& nodes() const { return nodes_; }
  const std::vector<Link>& links() const { return links_; }

  bool has_node(NodeId id) const;
  const Node& node(NodeId id) const;
  Node& node(NodeId id);
  std::optional<NodeId> find_node(std::string_view name) const;

  const Link* find_link(LinkId id) const;
  Link* find_link(LinkId id);
  const Link* find_link(NodeId x, NodeId y) const;

  std::optional<NodeId> first_of(Role role) const;
  std::vector<NodeId> all_of(Role role) const;
  // The partner in an IAB node box: IabMt for an IabDu and vice versa.
  std::optional<NodeId> group_partner(NodeId id) const;

  // Raw insertion without role checks; ids are assigned in insertion order.
  NodeId insert_node(Node node);
  LinkId insert_link(Link link);
  void erase_link(LinkId id);

 private:
  std::vector<Node> nodes_;
  std::vector<Link> links_;
  std::uint32_t next_link_ = 1;
};

struct NodeSpec {
  Role role = Role::kUe;
  Position position;
  std::optional<double> tx_power;
  std::string name;  // generated from role and id when empty
  std::optional<std::string> owner_group;
  std::optional<Carrier> carrier;
  std::optional<RadioOverride> radio_override;
};

struct LinkSpec {
  Medium medium = Medium::kWired;
  std::optional<Carrier> carrier;
  double wired_capacity = 0.0;
  std::optional<double> propagation_delay;  // radio default: distance / c
  std::optional<RadioOverride> radio_override;
};

NodeId add_node(Scenario& scenario, const NodeSpec& spec);
LinkId add_link(Scenario& scenario, NodeId a, NodeId b, const LinkSpec& spec);

// Role pairing rules shared by add_link and validate_topology. Returns an
// explanation when the pairing is illegal.
std::optional<std::string> medium_violation(const Node& a, const Node& b,
                                            Medium medium);

struct Violation {
  std::string code;
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
  bool has(std::string_view code) const;
};

ValidationReport validate_topology(const Scenario& scenario);

struct IabNodeSpec {
  std::string group;
  Position position;
  Carrier carrier;
  double mt_tx_power = 23.0;
  double du_tx_power = 30.0;
  std::optional<RadioOverride> radio_override;
};

// Queues an IAB node instantiation at time t. Donor coverage is evaluated when
// the directive fires.
InstantiateIabNode instantiate_iab_node(Scenario& scenario,
                                        const IabNodeSpec& spec, double t);

}  // namespace iab
