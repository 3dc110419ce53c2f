#include "iab/topology.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

#include <fmt/format.h>

#include "iab/error.h"

namespace iab {
namespace {

constexpr double kSpeedOfLight = 299792458.0;

bool finite(Position p) { return std::isfinite(p.x) && std::isfinite(p.y); }

}  // namespace

std::string_view to_string(Role role) {
  switch (role) {
    case Role::kCu: return "CU";
    case Role::kDonorDu: return "DonorDU";
    case Role::kIabMt: return "IabMt";
    case Role::kIabDu: return "IabDu";
    case Role::kUe: return "Ue";
    case Role::kUpf: return "Upf";
  }
  return "?";
}

std::optional<Role> parse_role(std::string_view text) {
  for (Role r : {Role::kCu, Role::kDonorDu, Role::kIabMt, Role::kIabDu,
                 Role::kUe, Role::kUpf}) {
    if (to_string(r) == text) return r;
  }
  return std::nullopt;
}

std::string_view to_string(Medium medium) {
  return medium == Medium::kWired ? "Wired" : "Radio";
}

double distance(Position a, Position b) { return std::hypot(a.x - b.x, a.y - b.y); }

std::vector<std::string> Carrier::violations() const {
  std::vector<std::string> out;
  if (!std::isfinite(bandwidth) || bandwidth <= 0) {
    out.push_back(fmt::format("bandwidth {} must be positive", bandwidth));
  }
  if (scs != 15e3 && scs != 30e3 && scs != 60e3) {
    out.push_back(fmt::format("scs {} not in {{15e3, 30e3, 60e3}}", scs));
  }
  if (!std::isfinite(center_frequency) || center_frequency <= bandwidth / 2) {
    out.push_back(fmt::format("center_frequency {} must exceed bandwidth/2",
                              center_frequency));
  }
  return out;
}

double directive_time(const Directive& d) {
  return std::visit([](const auto& v) { return v.at; }, d);
}

std::string_view directive_name(const Directive& d) {
  struct Namer {
    std::string_view operator()(const InstantiateIabNode&) const {
      return "instantiate_iab_node";
    }
    std::string_view operator()(const UpdateDuCarrier&) const {
      return "du_config_update";
    }
    std::string_view operator()(const RemoveLink&) const { return "remove_link"; }
  };
  return std::visit(Namer{}, d);
}

bool Scenario::has_node(NodeId id) const {
  return id.valid() && id.value <= nodes_.size();
}

const Node& Scenario::node(NodeId id) const {
  if (!has_node(id)) {
    throw Error(ErrorCode::kUnknownNode, fmt::format("node #{}", id.value));
  }
  return nodes_[id.value - 1];
}

Node& Scenario::node(NodeId id) {
  return const_cast<Node&>(std::as_const(*this).node(id));
}

std::optional<NodeId> Scenario::find_node(std::string_view name) const {
  for (const Node& n : nodes_) {
    if (n.name == name) return n.id;
  }
  return std::nullopt;
}

const Link* Scenario::find_link(LinkId id) const {
  for (const Link& l : links_) {
    if (l.id == id) return &l;
  }
  return nullptr;
}

Link* Scenario::find_link(LinkId id) {
  return const_cast<Link*>(std::as_const(*this).find_link(id));
}

const Link* Scenario::find_link(NodeId x, NodeId y) const {
  for (const Link& l : links_) {
    if (l.connects(x, y)) return &l;
  }
  return nullptr;
}

std::optional<NodeId> Scenario::first_of(Role role) const {
  for (const Node& n : nodes_) {
    if (n.role == role) return n.id;
  }
  return std::nullopt;
}

std::vector<NodeId> Scenario::all_of(Role role) const {
  std::vector<NodeId> out;
  for (const Node& n : nodes_) {
    if (n.role == role) out.push_back(n.id);
  }
  return out;
}

std::optional<NodeId> Scenario::group_partner(NodeId id) const {
  const Node& self = node(id);
  if (!self.owner_group) return std::nullopt;
  Role want;
  if (self.role == Role::kIabDu) {
    want = Role::kIabMt;
  } else if (self.role == Role::kIabMt) {
    want = Role::kIabDu;
  } else {
    return std::nullopt;
  }
  for (const Node& n : nodes_) {
    if (n.role == want && n.owner_group == self.owner_group) return n.id;
  }
  return std::nullopt;
}

NodeId Scenario::insert_node(Node node) {
  node.id = NodeId{static_cast<std::uint32_t>(nodes_.size() + 1)};
  if (node.name.empty()) {
    node.name = fmt::format("{}{}", to_string(node.role), node.id.value);
  }
  nodes_.push_back(std::move(node));
  return nodes_.back().id;
}

LinkId Scenario::insert_link(Link link) {
  link.id = LinkId{next_link_++};
  links_.push_back(std::move(link));
  return links_.back().id;
}

void Scenario::erase_link(LinkId id) {
  std::erase_if(links_, [id](const Link& l) { return l.id == id; });
}

NodeId add_node(Scenario& scenario, const NodeSpec& spec) {
  if (!finite(spec.position)) {
    throw Error(ErrorCode::kInvalidArgument, "position must be finite");
  }
  if (spec.role == Role::kCu && scenario.first_of(Role::kCu)) {
    throw Error(ErrorCode::kDuplicateCu, "scenario already has a CU");
  }
  if (spec.role == Role::kUpf && scenario.first_of(Role::kUpf)) {
    throw Error(ErrorCode::kDuplicateUpf, "scenario already has a UPF");
  }
  if (!spec.name.empty() && scenario.find_node(spec.name)) {
    throw Error(ErrorCode::kDuplicateName, spec.name);
  }
  if (spec.carrier) {
    auto bad = spec.carrier->violations();
    if (!bad.empty()) throw Error(ErrorCode::kInvalidArgument, bad.front());
  }
  Node node;
  node.name = spec.name;
  node.role = spec.role;
  node.position = spec.position;
  node.tx_power = spec.tx_power;
  node.owner_group = spec.owner_group;
  node.carrier = spec.carrier;
  node.radio_override = spec.radio_override;
  return scenario.insert_node(std::move(node));
}

std::optional<std::string> medium_violation(const Node& a, const Node& b,
                                            Medium medium) {
  auto pair_is = [&](Role x, Role y) {
    return (a.role == x && b.role == y) || (a.role == y && b.role == x);
  };
  if (medium == Medium::kWired) {
    if (pair_is(Role::kCu, Role::kDonorDu) || pair_is(Role::kCu, Role::kUpf)) {
      return std::nullopt;
    }
    if (pair_is(Role::kIabMt, Role::kIabDu)) {
      if (a.owner_group && a.owner_group == b.owner_group) return std::nullopt;
      return fmt::format("internal link {}-{} joins different IAB nodes",
                         a.name, b.name);
    }
    return fmt::format("wired link not permitted between {} ({}) and {} ({})",
                       a.name, to_string(a.role), b.name, to_string(b.role));
  }
  const Node& du = is_du(a.role) ? a : b;
  const Node& term = is_du(a.role) ? b : a;
  if (!is_du(du.role) || !is_terminal(term.role)) {
    return fmt::format("radio link needs a DU and a UE/IAB-MT, got {} ({}) and "
                       "{} ({})",
                       a.name, to_string(a.role), b.name, to_string(b.role));
  }
  if (term.role == Role::kIabMt && du.role != Role::kDonorDu) {
    return fmt::format("IAB-MT {} may only attach to a Donor DU", term.name);
  }
  return std::nullopt;
}

LinkId add_link(Scenario& scenario, NodeId a, NodeId b, const LinkSpec& spec) {
  if (!scenario.has_node(a) || !scenario.has_node(b)) {
    throw Error(ErrorCode::kUnknownNode,
                fmt::format("link endpoint #{} / #{}", a.value, b.value));
  }
  if (a == b) throw Error(ErrorCode::kIllegalMedium, "self link");
  const Node& na = scenario.node(a);
  const Node& nb = scenario.node(b);
  if (auto why = medium_violation(na, nb, spec.medium)) {
    throw Error(ErrorCode::kIllegalMedium, *why);
  }
  if (scenario.find_link(a, b)) {
    throw Error(ErrorCode::kInvalidArgument,
                fmt::format("{} and {} are already linked", na.name, nb.name));
  }
  Link link;
  link.a = a;
  link.b = b;
  link.medium = spec.medium;
  link.radio_override = spec.radio_override;
  if (spec.medium == Medium::kRadio) {
    if (!spec.carrier) {
      throw Error(ErrorCode::kMissingCarrier,
                  fmt::format("radio link {}-{}", na.name, nb.name));
    }
    auto bad = spec.carrier->violations();
    if (!bad.empty()) throw Error(ErrorCode::kInvalidArgument, bad.front());
    link.carrier = spec.carrier;
    link.propagation_delay = spec.propagation_delay.value_or(
        distance(na.position, nb.position) / kSpeedOfLight);
  } else {
    const bool internal = na.role == Role::kIabMt || na.role == Role::kIabDu;
    if (internal) {
      link.wired_capacity = spec.wired_capacity > 0
                                ? spec.wired_capacity
                                : std::numeric_limits<double>::infinity();
      link.propagation_delay = spec.propagation_delay.value_or(0.0);
    } else {
      if (!(spec.wired_capacity > 0)) {
        throw Error(ErrorCode::kInvalidArgument,
                    "wired link needs a positive capacity");
      }
      link.wired_capacity = spec.wired_capacity;
      link.propagation_delay = spec.propagation_delay.value_or(0.0);
    }
  }
  if (!(link.propagation_delay >= 0) || !std::isfinite(link.propagation_delay)) {
    throw Error(ErrorCode::kInvalidArgument, "propagation_delay must be >= 0");
  }
  return scenario.insert_link(std::move(link));
}

bool ValidationReport::has(std::string_view code) const {
  return std::any_of(violations.begin(), violations.end(),
                     [&](const Violation& v) { return v.code == code; });
}

ValidationReport validate_topology(const Scenario& s) {
  ValidationReport report;
  auto add = [&](std::string code, std::string message) {
    report.violations.push_back({std::move(code), std::move(message)});
  };

  const auto cus = s.all_of(Role::kCu);
  const auto upfs = s.all_of(Role::kUpf);
  if (cus.empty()) add("no_cu", "no CU");
  if (cus.size() > 1) add("multiple_cu", fmt::format("{} CUs", cus.size()));
  if (upfs.empty()) add("no_upf", "no UPF");
  if (upfs.size() > 1) add("multiple_upf", fmt::format("{} UPFs", upfs.size()));

  if (!std::isfinite(s.duration) || s.duration <= 0) {
    add("invalid_duration", "duration must be > 0");
  }
  for (const auto& v : s.radio_defaults.violations()) add("invalid_radio", v);
  const EngineConfig& e = s.engine;
  if (e.queue_capacity == 0 || e.ttl == 0 || e.control_message_size == 0) {
    add("invalid_engine", "queue_capacity, ttl and control_message_size must be > 0");
  }

  std::set<std::string> names;
  std::map<std::string, std::vector<const Node*>> groups;
  for (const Node& n : s.nodes()) {
    if (!names.insert(n.name).second) {
      add("duplicate_name", fmt::format("node name {} reused", n.name));
    }
    if (!finite(n.position)) {
      add("invalid_position", fmt::format("{} has a non-finite position", n.name));
    }
    if (is_radio_capable(n.role) && !n.tx_power) {
      add("missing_tx_power", fmt::format("{} needs tx_power", n.name));
    }
    if (is_du(n.role)) {
      if (!n.carrier) {
        add("missing_carrier", fmt::format("DU {} advertises no carrier", n.name));
      } else {
        for (const auto& v : n.carrier->violations()) {
          add("invalid_carrier", fmt::format("{}: {}", n.name, v));
        }
      }
    }
    if (n.radio_override) {
      for (const auto& v :
           n.radio_override->applied_to(s.radio_defaults).violations()) {
        add("invalid_radio", fmt::format("{}: {}", n.name, v));
      }
    }
    if (n.role == Role::kIabDu || n.role == Role::kIabMt) {
      if (!n.owner_group) {
        add("ungrouped_iab", fmt::format("{} has no owner_group", n.name));
      } else {
        groups[*n.owner_group].push_back(&n);
      }
    }
  }
  for (const auto& [group, members] : groups) {
    int mts = 0;
    int dus = 0;
    for (const Node* n : members) (n->role == Role::kIabMt ? mts : dus)++;
    if (dus != 1 || mts != 1) {
      add("ungrouped_iab",
          fmt::format("group {} has {} IabDu and {} IabMt (need exactly 1 each)",
                      group, dus, mts));
      continue;
    }
    if (!s.find_link(members[0]->id, members[1]->id)) {
      add("missing_internal_link",
          fmt::format("group {} lacks the internal MT-DU link", group));
    }
  }

  bool cu_wired_to_donor = false;
  std::set<std::pair<std::uint32_t, std::uint32_t>> seen;
  for (const Link& l : s.links()) {
    if (!s.has_node(l.a) || !s.has_node(l.b)) {
      add("unknown_endpoint", fmt::format("link #{} has an unknown endpoint",
                                          l.id.value));
      continue;
    }
    const Node& a = s.node(l.a);
    const Node& b = s.node(l.b);
    if (l.a == l.b) {
      add("self_link", fmt::format("link #{} loops on {}", l.id.value, a.name));
      continue;
    }
    auto key = std::minmax(l.a.value, l.b.value);
    if (!seen.insert(key).second) {
      add("duplicate_link",
          fmt::format("{} and {} are linked twice", a.name, b.name));
    }
    if (auto why = medium_violation(a, b, l.medium)) {
      add("illegal_medium", *why);
    }
    if (l.medium == Medium::kRadio) {
      if (!l.carrier) {
        add("missing_carrier",
            fmt::format("radio link {}-{} has no carrier", a.name, b.name));
      } else {
        for (const auto& v : l.carrier->violations()) {
          add("invalid_carrier", fmt::format("{}-{}: {}", a.name, b.name, v));
        }
      }
    } else if (!(l.wired_capacity > 0)) {
      add("bad_capacity",
          fmt::format("wired link {}-{} needs capacity > 0", a.name, b.name));
    }
    if (!(l.propagation_delay >= 0) || !std::isfinite(l.propagation_delay)) {
      add("bad_delay", fmt::format("link {}-{} has an invalid propagation delay",
                                   a.name, b.name));
    }
    if (l.medium == Medium::kWired &&
        ((a.role == Role::kCu && b.role == Role::kDonorDu) ||
         (a.role == Role::kDonorDu && b.role == Role::kCu))) {
      cu_wired_to_donor = true;
    }
  }
  if (!cus.empty() && !cu_wired_to_donor) {
    add("cu_not_wired_to_donor_du", "CU is not wired to any Donor DU");
  }
  if (!cus.empty() && !upfs.empty() && !s.find_link(cus.front(), upfs.front())) {
    add("cu_not_wired_to_upf", "CU is not wired to the UPF");
  }

  std::set<std::string> flow_ids;
  for (const FlowSpec& f : s.flows) {
    if (!flow_ids.insert(f.id).second) {
      add("invalid_flow", fmt::format("flow id {} reused", f.id));
    }
    if (!s.has_node(f.src) || !s.has_node(f.dst)) {
      add("invalid_flow", fmt::format("flow {} has an unknown endpoint", f.id));
      continue;
    }
    Role rs = s.node(f.src).role;
    Role rd = s.node(f.dst).role;
    if (!((rs == Role::kUpf && rd == Role::kUe) ||
          (rs == Role::kUe && rd == Role::kUpf))) {
      add("invalid_flow",
          fmt::format("flow {} must run between the UPF and a UE", f.id));
    }
    if (!(f.rate > 0) || !std::isfinite(f.rate)) {
      add("invalid_flow", fmt::format("flow {} needs rate > 0", f.id));
    }
    if (f.packet_size == 0) {
      add("invalid_flow", fmt::format("flow {} needs packet_size > 0", f.id));
    }
    if (!(f.start >= 0 && f.start < f.stop && f.stop <= s.duration)) {
      add("invalid_flow",
          fmt::format("flow {} needs 0 <= start < stop <= duration", f.id));
    }
  }
  return report;
}

InstantiateIabNode instantiate_iab_node(Scenario& scenario,
                                        const IabNodeSpec& spec, double t) {
  if (!(t >= 0 && t < scenario.duration)) {
    throw Error(ErrorCode::kPreconditionViolated,
                fmt::format("t = {} outside [0, duration = {})", t,
                            scenario.duration));
  }
  if (!finite(spec.position)) {
    throw Error(ErrorCode::kInvalidArgument, "position must be finite");
  }
  if (spec.group.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "IAB node needs a group tag");
  }
  auto bad = spec.carrier.violations();
  if (!bad.empty()) throw Error(ErrorCode::kInvalidArgument, bad.front());
  InstantiateIabNode d;
  d.at = t;
  d.group = spec.group;
  d.position = spec.position;
  d.carrier = spec.carrier;
  d.mt_tx_power = spec.mt_tx_power;
  d.du_tx_power = spec.du_tx_power;
  d.radio_override = spec.radio_override;
  scenario.schedule.push_back(d);
  return d;
}

}  // namespace iab
