#include <gtest/gtest.h>

#include "censorlab/dns_detect.hpp"
#include "support.hpp"

using namespace censorlab;
using namespace censorlab::dns_detect;
using namespace testsupport;

namespace {

ResolutionRecord rec(const std::string& d, std::set<Ipv4Addr> a, Vantage v = Vantage::Direct) {
  return ResolutionRecord{d, v, std::move(a)};
}

Ipv4Addr A(const char* s) { return Ipv4Addr::from_string(s); }

// Linear path whose resolver poisons `poisoned` with the given answers.
netsim::Topology poisoned_linear(const std::map<std::string, Ipv4Addr>& poisoned) {
  scenarios::LinearSpec spec;
  spec.routers = 3;
  spec.sites = {"a.example", "b.example", "c.example", "d.example"};
  auto cfg = scenarios::linear_topology(spec);
  cfg.resolvers[0].poisoned_map = poisoned;
  return netsim::build_topology(cfg);
}

}  // namespace

TEST(OverlapFilter, Cases) {
  EXPECT_EQ(overlap_filter(rec("x", {A("1.2.3.4")}), rec("x", {A("1.2.3.4"), A("5.6.7.8")}, Vantage::Clean)),
            Overlap::Overlapping);
  EXPECT_EQ(overlap_filter(rec("x", {A("10.11.12.13")}), rec("x", {A("5.6.7.8")}, Vantage::Clean)), Overlap::Disjoint);
  EXPECT_EQ(overlap_filter(rec("x", {A("5.6.7.8")}), rec("x", {A("5.6.7.8")}, Vantage::Clean)), Overlap::Overlapping);
  EXPECT_THROW(overlap_filter(rec("x", {}), rec("y", {}, Vantage::Clean)), std::invalid_argument);
}

TEST(FrequencyAnalysis, Cases) {
  auto shared = A("59.185.200.1");
  auto cdn = A("23.1.1.1");
  auto m = frequency_analysis({rec("a", {shared}), rec("b", {shared}), rec("c", {A("8.8.4.4")})}, {});
  ASSERT_EQ(m.size(), 1u);
  EXPECT_EQ(m[shared], (std::set<std::string>{"a", "b"}));
  EXPECT_TRUE(frequency_analysis({rec("a", {cdn}), rec("b", {cdn})}, {cdn}).empty());
  EXPECT_TRUE(frequency_analysis({rec("a", {A("1.1.1.1")}), rec("b", {A("2.2.2.2")})}, {}).empty());
  EXPECT_TRUE(frequency_analysis({rec("a", {A("1.1.1.1")}), rec("a", {A("1.1.1.1")})}, {}).empty());
}

TEST(Bogons, Examples) {
  EXPECT_TRUE(is_bogon(A("10.1.2.3")));
  EXPECT_FALSE(is_bogon(A("8.8.8.8")));
  EXPECT_TRUE(is_bogon(A("100.64.0.1")));
}

TEST(Bogons, PrefixBoundaries) {
  for (const auto& p : bogon_prefixes()) {
    EXPECT_TRUE(is_bogon(p.first())) << p.str();
    EXPECT_TRUE(is_bogon(p.last())) << p.str();
    if (p.first().value > 0) {
      EXPECT_FALSE(is_bogon(Ipv4Addr(p.first().value - 1))) << p.str();
    }
    if (p.last().value < 0xFFFFFFFFu) {
      EXPECT_FALSE(is_bogon(Ipv4Addr(p.last().value + 1))) << p.str();
    }
  }
}

TEST(SameAs, Cases) {
  std::vector<Prefix> client = {Prefix::from_string("59.185.0.0/16")};
  EXPECT_TRUE(same_as_heuristic(A("59.185.200.1"), client));
  EXPECT_FALSE(same_as_heuristic(A("93.184.216.34"), client));
  EXPECT_TRUE(same_as_heuristic(A("59.185.255.255"), client));
  EXPECT_TRUE(same_as_heuristic(A("59.185.0.0"), client));
}

TEST(ScreenDomains, HeuristicsAndSoundness) {
  auto topo = poisoned_linear({{"a.example", A("10.10.34.34")},       // bogon
                               {"b.example", A("117.200.9.9")},        // inside client AS
                               {"c.example", A("203.99.1.1")},         // shared with d
                               {"d.example", A("203.99.1.1")}});
  netsim::Network net(topo, 1);
  ScreeningContext ctx;
  ctx.client_as_prefixes = {Prefix::from_string("117.200.0.0/16")};
  auto vs = screen_domains(net, kClient, scenarios::linear_resolver_addr(),
                           {"a.example", "b.example", "c.example", "d.example"}, ctx);
  ASSERT_EQ(vs.size(), 4u);
  std::map<std::string, DnsVerdict> by;
  for (const auto& v : vs) by[v.domain] = v;
  EXPECT_EQ(by["a.example"].status, Status::Censored);
  EXPECT_EQ(by["a.example"].reason, Reason::Bogon);
  EXPECT_EQ(by["b.example"].reason, Reason::SameAs);
  EXPECT_EQ(by["c.example"].reason, Reason::FrequencyCluster);
  EXPECT_EQ(by["d.example"].status, Status::Censored);
}

TEST(ScreenDomains, CdnStyleOverlapIsNotCensored) {
  scenarios::LinearSpec spec;
  spec.routers = 2;
  spec.sites = {"cdn.example"};
  auto cfg = scenarios::linear_topology(spec);
  cfg.resolvers[0].honest_map["cdn.example"] = {scenarios::linear_server_addr(), A("23.1.1.1")};
  cfg.resolvers[0].use_authoritative = true;
  netsim::Network net(netsim::build_topology(cfg), 1);
  auto vs = screen_domains(net, kClient, scenarios::linear_resolver_addr(), {"cdn.example"}, {});
  ASSERT_EQ(vs.size(), 1u);
  EXPECT_EQ(vs[0].status, Status::Uncensored);
}

TEST(DiscoverResolvers, BsnlScenario) {
  auto sc = scenarios::build("bsnl_dns");
  netsim::Network net(netsim::build_topology(sc.topology), 1);
  std::vector<Ipv4Addr> range;
  for (const auto& p : sc.campaign["dns"]["resolver_ranges"]) {
    auto e = expand(Prefix::from_string(p.get<std::string>()));
    range.insert(range.end(), e.begin(), e.end());
  }
  auto found = discover_resolvers(net, sc.campaign["client"].get<std::string>(), range,
                                  sc.campaign["dns"]["probe_domain"].get<std::string>(),
                                  A(sc.campaign["dns"]["known_answer"].get<std::string>().c_str()));
  EXPECT_EQ(found.size(), 182u);
  // Misconfigured resolvers and silent hosts in the range are left out.
  for (const auto& r : sc.topology.resolvers) {
    bool listed = std::find(found.begin(), found.end(), r.addr) != found.end();
    bool in_range = std::find(range.begin(), range.end(), r.addr) != range.end();
    if (in_range && r.id.rfind("misconf", 0) == 0) {
      EXPECT_FALSE(listed) << r.id;
    }
  }
  for (const auto& h : sc.topology.hosts) EXPECT_EQ(std::find(found.begin(), found.end(), h.addr), found.end());
}

TEST(FindCensoriousResolvers, MatchesPlantedGroundTruth) {
  auto sc = scenarios::build("bsnl_dns");
  auto topo = netsim::build_topology(sc.topology);
  netsim::Network net(topo, 2);
  std::vector<Ipv4Addr> resolvers;
  std::map<Ipv4Addr, std::set<std::string>> truth;
  for (const auto& r : sc.topology.resolvers) {
    if (r.id.rfind("misconf", 0) == 0 || r.addr == A("9.9.9.9")) continue;
    resolvers.push_back(r.addr);
    for (const auto& [d, _] : r.poisoned_map) truth[r.addr].insert(d);
  }
  ScreeningContext ctx;
  ctx.client_as_prefixes = topo.config().as_prefixes.at("BSNL-AS");
  auto found = find_censorious_resolvers(net, sc.campaign["client"].get<std::string>(), resolvers, sc.pbw, ctx);
  EXPECT_EQ(found.size(), 17u);
  EXPECT_EQ(found, truth);
}

TEST(FindCensoriousResolvers, HonestOnlyIsEmpty) {
  netsim::Network net(linear(3), 1);
  auto found = find_censorious_resolvers(net, kClient, {scenarios::linear_resolver_addr()},
                                         {"open001.example", "blocked001.example"}, {});
  EXPECT_TRUE(found.empty());
}

TEST(Verdicts, CsvAndJson) {
  DnsVerdict v{"a.example", Status::Censored, Reason::Bogon, A("1.2.3.4"), {A("10.0.0.1")}};
  auto csv = verdicts_to_csv({v});
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "domain,resolver,status,reason");
  EXPECT_NE(csv.find("a.example,1.2.3.4,Censored,Bogon"), std::string::npos);
  auto j = verdicts_to_json({v});
  EXPECT_EQ(j[0]["status"], "Censored");
}

TEST(Expand, CoversPrefix) {
  auto e = expand(Prefix::from_string("10.0.0.0/30"));
  ASSERT_EQ(e.size(), 4u);
  EXPECT_EQ(e.front().str(), "10.0.0.0");
  EXPECT_EQ(e.back().str(), "10.0.0.3");
}
