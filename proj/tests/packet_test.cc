#include <gtest/gtest.h>

#include <set>

#include "iab/error.h"
#include "iab/packet.h"
#include "support.h"

using namespace iab;

namespace {

Tunnel tunnel_to(std::uint32_t endpoint, std::uint32_t teid) {
  Tunnel t;
  t.key = {NodeId{endpoint}, Teid{teid}};
  return t;
}

Packet user(std::uint32_t payload) {
  Packet p;
  p.id = 42;
  p.flow = 1;
  p.payload_size = payload;
  p.src = NodeId{2};
  p.dst = NodeId{5};
  return p;
}

}  // namespace

TEST(TeidAllocatorTest, FreshAndNonZero) {
  TeidAllocator a(7);
  const NodeId cu{1};
  const Teid first = a.allocate(cu);
  EXPECT_NE(first.value, 0u);
  const Teid second = a.allocate(cu);
  EXPECT_NE(first, second);
  EXPECT_TRUE(a.issued(cu, first));
  EXPECT_FALSE(a.issued(NodeId{2}, first));
}

TEST(TeidAllocatorTest, SameSeedSameSequence) {
  TeidAllocator a(7), b(7), c(8);
  std::vector<std::uint32_t> sa, sb, sc;
  for (int i = 0; i < 50; ++i) {
    const NodeId n{static_cast<std::uint32_t>(1 + i % 3)};
    sa.push_back(a.allocate(n).value);
    sb.push_back(b.allocate(n).value);
    sc.push_back(c.allocate(n).value);
  }
  EXPECT_EQ(sa, sb);
  EXPECT_NE(sa, sc);
}

TEST(TeidAllocatorTest, NeverRepeatsPerEndpoint) {
  TeidAllocator a(1);
  std::set<std::uint32_t> seen;
  for (int i = 0; i < 5000; ++i) {
    EXPECT_TRUE(seen.insert(a.allocate(NodeId{3}).value).second);
  }
}

TEST(Encapsulation, WireSizes) {
  const Packet p = user(1000);
  EXPECT_EQ(p.wire_size(), 1000u);
  const Packet once = encapsulate(p, tunnel_to(1, 0x11));
  EXPECT_EQ(once.wire_size(), 1008u);
  EXPECT_EQ(once.depth(), 1u);
  EXPECT_EQ(std::get<GtpHeader>(once.header_stack.back()).length, 1000u);
  // UE2's F1-U inside the MT session tunnel
  const Packet twice = encapsulate(once, tunnel_to(2, 0x22));
  EXPECT_EQ(twice.depth(), 2u);
  EXPECT_EQ(twice.wire_size(), 1016u);
  EXPECT_EQ(twice.teids(), (std::vector<std::uint32_t>{0x11, 0x22}));
  EXPECT_IAB_ERROR(encapsulate(twice, tunnel_to(3, 0x33)),
                   ErrorCode::kDepthExceeded);
}

TEST(Encapsulation, ConfiguredHeaderSizes) {
  const Packet g = encapsulate(user(500), tunnel_to(1, 9), 12);
  EXPECT_EQ(g.wire_size(), 512u);
  const Packet b = push_bap(g, 3, 6);
  EXPECT_EQ(b.wire_size(), 518u);
  EXPECT_EQ(b.header_bytes(), 18u);
}

TEST(Decapsulation, RoundTrip) {
  const Packet p = user(1400);
  const Tunnel t = tunnel_to(4, 0xabc);
  EXPECT_EQ(decapsulate(encapsulate(p, t), t.key.teid), p);
}

TEST(Decapsulation, Guards) {
  const Packet p = encapsulate(user(100), tunnel_to(4, 0xabc));
  EXPECT_IAB_ERROR(decapsulate(p, Teid{0xabd}), ErrorCode::kTeidMismatch);
  EXPECT_IAB_ERROR(decapsulate(user(100), Teid{1}), ErrorCode::kEmptyStack);
  EXPECT_IAB_ERROR(decapsulate(push_bap(user(100), 1), Teid{1}),
                   ErrorCode::kUnexpectedHeader);
  EXPECT_IAB_ERROR(pop_bap(push_bap(user(100), 1), 2),
                   ErrorCode::kUnexpectedHeader);
}

TEST(Decapsulation, InnerHeaderSurvives) {
  const Packet inner = encapsulate(user(1000), tunnel_to(1, 0x11));
  const Packet outer = encapsulate(inner, tunnel_to(2, 0x22));
  const Packet once = decapsulate(outer, Teid{0x22});
  EXPECT_EQ(once.depth(), 1u);
  EXPECT_EQ(once.teids(), std::vector<std::uint32_t>{0x11});
  EXPECT_EQ(once, inner);
}

TEST(TunnelRegistryTest, KeysByReceiver) {
  TunnelRegistry r(7);
  const Tunnel ul = r.open(NodeId{1}, NodeId{2}, "session-ul");
  const Tunnel dl = r.open(NodeId{2}, NodeId{1}, "session-dl");
  EXPECT_EQ(ul.key.endpoint, NodeId{2});
  EXPECT_EQ(dl.key.endpoint, NodeId{1});
  ASSERT_NE(r.find(ul.key), nullptr);
  EXPECT_EQ(r.find(ul.key)->purpose, "session-ul");
  EXPECT_EQ(r.get(dl.id).sender, NodeId{2});
  EXPECT_EQ(r.find(TunnelKey{NodeId{9}, ul.key.teid}), nullptr);
}

TEST(PathModeTest, Parse) {
  EXPECT_EQ(parse_path_mode("bap"), PathMode::kBapBypass);
  EXPECT_EQ(parse_path_mode("upf-reroute"), PathMode::kUpfReroute);
  EXPECT_FALSE(parse_path_mode("direct").has_value());
}
