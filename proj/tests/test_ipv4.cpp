#include <gtest/gtest.h>

#include "censorlab/ipv4.hpp"

using censorlab::Ipv4Addr;
using censorlab::Prefix;

TEST(Ipv4, ParsesAndRendersDottedQuad) {
  auto a = Ipv4Addr::parse("192.168.1.20");
  ASSERT_TRUE(a);
  EXPECT_EQ(a->value, 0xC0A80114u);
  EXPECT_EQ(a->str(), "192.168.1.20");
}

TEST(Ipv4, RejectsMalformedText) {
  for (const char* bad : {"", "1.2.3", "1.2.3.4.5", "256.0.0.1", "1..2.3", "a.b.c.d", "1.2.3.4 ", "01.2.3.4x"})
    EXPECT_FALSE(Ipv4Addr::parse(bad)) << bad;
  EXPECT_THROW(Ipv4Addr::from_string("300.1.1.1"), std::invalid_argument);
}

TEST(Ipv4, OrdersNumerically) {
  EXPECT_LT(Ipv4Addr(9, 255, 255, 255), Ipv4Addr(10, 0, 0, 0));
  EXPECT_EQ(Ipv4Addr(1, 2, 3, 4), Ipv4Addr::from_string("1.2.3.4"));
}

TEST(Prefix, MasksNetworkAndContainsBoundaries) {
  auto p = Prefix::from_string("10.1.2.3/16");
  EXPECT_EQ(p.str(), "10.1.0.0/16");
  EXPECT_TRUE(p.contains(Ipv4Addr(10, 1, 0, 0)));
  EXPECT_TRUE(p.contains(Ipv4Addr(10, 1, 255, 255)));
  EXPECT_FALSE(p.contains(Ipv4Addr(10, 2, 0, 0)));
  EXPECT_FALSE(p.contains(Ipv4Addr(10, 0, 255, 255)));
  EXPECT_EQ(p.size(), 65536u);
  EXPECT_EQ(p.last().str(), "10.1.255.255");
}

TEST(Prefix, ZeroAndFullLength) {
  auto all = Prefix::from_string("0.0.0.0/0");
  EXPECT_TRUE(all.contains(Ipv4Addr(255, 255, 255, 255)));
  auto host = Prefix::from_string("8.8.8.8/32");
  EXPECT_TRUE(host.contains(Ipv4Addr(8, 8, 8, 8)));
  EXPECT_FALSE(host.contains(Ipv4Addr(8, 8, 8, 9)));
  EXPECT_THROW(Prefix::from_string("1.2.3.4/33"), std::invalid_argument);
  EXPECT_EQ(Prefix::from_string("1.2.3.4").length, 32);
}
