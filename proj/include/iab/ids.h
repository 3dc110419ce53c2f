#pragma once

#include <compare>
#include <cstdint>
#include <functional>

namespace iab {

template <typename Tag>
struct StrongId {
  std::uint32_t value = 0;

  constexpr bool valid() const { return value != 0; }
  friend constexpr auto operator<=>(StrongId, StrongId) = default;
};

struct NodeTag {};
struct LinkTag {};
struct TunnelTag {};

// Ids are assigned from 1 in insertion order; 0 means "none".
using NodeId = StrongId<NodeTag>;
using LinkId = StrongId<LinkTag>;
using TunnelId = StrongId<TunnelTag>;

// GTP tunnel endpoint id. Unique per receiving endpoint only, so a tunnel is
// addressed by the (endpoint, teid) pair. 0 is reserved.
struct Teid {
  std::uint32_t value = 0;

  friend constexpr auto operator<=>(Teid, Teid) = default;
};

struct TunnelKey {
  NodeId endpoint;
  Teid teid;

  friend constexpr auto operator<=>(const TunnelKey&, const TunnelKey&) = default;
};

}  // namespace iab

template <typename Tag>
struct std::hash<iab::StrongId<Tag>> {
  std::size_t operator()(iab::StrongId<Tag> id) const noexcept {
    return std::hash<std::uint32_t>{}(id.value);
  }
};
