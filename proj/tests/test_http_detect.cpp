#include <gtest/gtest.h>

#include <random>

#include "censorlab/http_detect.hpp"
#include "support.hpp"

using namespace censorlab;
using namespace censorlab::http_detect;
using namespace testsupport;

// Frozen from tests/oracles/difflib_oracle.py.
TEST(ContentDiff, MatchesDifflibOracle) {
  struct Case {
    std::string a, b;
    double want;
  };
  std::string aab, bba;
  for (int i = 0; i < 20; ++i) {
    aab += "aaaaabbbbbaaaaa";
    bba += "bbbbbaaaaabbbbb";
  }
  std::vector<Case> cases = {
      {"", "", 0.0},
      {"abc", "", 1.0},
      {"abcd", "abcd", 0.0},
      {"abcd", "bcde", 0.25},
      {"<html><title>News</title><body>Today</body></html>", "<html><title>News</title><body>Yesterday</body></html>",
       0.076923076923},
      {"HTTP/1.1 200 OK\r\nContent-Length: 5\r\n\r\nhello", "HTTP/1.1 200 OK\r\n\r\nhello world", 0.342465753425},
      {aab, bba, 0.333333333333},
      {"The quick brown fox jumps over the lazy dog", "The quick brown cat leaps over the lazy dog", 0.139534883721},
      {"abababbaaab", "bbab", 0.466666666667},
      {"abbbb", "bbaaab", 0.454545454545},
  };
  for (const auto& c : cases) EXPECT_NEAR(content_diff(c.a, c.b), c.want, 1e-9) << c.a << " | " << c.b;
}

TEST(ContentDiff, AppendedNoiseIsOneThird) {
  std::string body(300, 'x');
  std::string noise(300, 'y');
  EXPECT_NEAR(content_diff(body, body + noise), 1.0 / 3.0, 1e-12);
  EXPECT_DOUBLE_EQ(content_diff("abc", "xyz"), 1.0);
}

TEST(ContentDiff, SymmetricAndBoundedOnRandomBytes) {
  std::mt19937 gen(7);
  for (int i = 0; i < 1000; ++i) {
    auto make = [&] {
      std::string s(gen() % 40, '\0');
      int alphabet = 2 + static_cast<int>(gen() % 6);
      for (auto& c : s) c = static_cast<char>('a' + gen() % alphabet);
      return s;
    };
    auto a = make(), b = make();
    double d = content_diff(a, b);
    EXPECT_GE(d, 0.0);
    EXPECT_LE(d, 1.0);
    EXPECT_DOUBLE_EQ(d, content_diff(b, a));
    EXPECT_DOUBLE_EQ(content_diff(a, a), 0.0);
  }
}

TEST(ClassifyHttp, Examples) {
  auto real = netsim::default_site_body("blocked001.example");
  auto notice = netsim::archetype("airtel_wm").notification.body_template;
  auto v = classify_http("blocked001.example", notice, real);
  EXPECT_EQ(v.status, DiffStatus::ConfirmedBlocked);
  EXPECT_EQ(v.fingerprint, "airtel.com/dot");

  std::string page = "<html><title>Daily news</title><body>" + std::string(120, 'n') + "</body></html>";
  std::string ads = "<html><title>Daily news</title><body>" + std::string(60, 'n') + std::string(70, 'q') + "</body></html>";
  auto dyn = classify_http("news.example", ads, page);
  EXPECT_GT(dyn.difference, 0.3);
  EXPECT_EQ(dyn.status, DiffStatus::NeedsReview);

  auto same = classify_http("x", real, real);
  EXPECT_EQ(same.status, DiffStatus::Unblocked);
  EXPECT_EQ(same.direct_digest, same.clean_digest);
}

TEST(ClassifyHttp, NeverConfirmsWithoutFingerprint) {
  std::mt19937 gen(3);
  for (int i = 0; i < 200; ++i) {
    std::string a(gen() % 100, 'a'), b(gen() % 100 + 1, 'b');
    auto v = classify_http("d", a, b);
    EXPECT_NE(v.status, DiffStatus::ConfirmedBlocked);
  }
}

TEST(ApplyReview, ResolvesOnlyPending) {
  auto v = classify_http("d", std::string(50, 'a'), std::string(50, 'b'));
  ASSERT_EQ(v.status, DiffStatus::NeedsReview);
  EXPECT_EQ(apply_review(v, true).status, DiffStatus::ConfirmedBlocked);
  EXPECT_EQ(apply_review(v, true).fingerprint, "review");
  EXPECT_EQ(apply_review(v, false).status, DiffStatus::Unblocked);
  auto u = classify_http("d", "x", "x");
  EXPECT_EQ(apply_review(u, true).status, DiffStatus::Unblocked);
  auto q = review_queue_text({v, u});
  EXPECT_EQ(std::count(q.begin(), q.end(), '\n'), 2);
  EXPECT_NE(q.find("d\t1.000\t"), std::string::npos);
}

TEST(OoniCompare, FailurePaths) {
  HttpResponse control;
  control.header_fields = {{"Server", "nginx"}, {"Content-Type", "text/html"}};
  control.body = "<html><title>Welcome visitors</title><body>" + std::string(500, 'c') + "</body></html>";
  control.title_tag = "Welcome visitors";

  // Block page copying the server's header names: header match hides it.
  HttpResponse block;
  block.header_fields = {{"server", "x"}, {"content-type", "text/html"}};
  block.body = "<html><body>blocked</body></html>";
  auto c = ooni_compare(block, control);
  EXPECT_FALSE(c.body_length_match);
  EXPECT_TRUE(c.headers_match);
  EXPECT_FALSE(c.title_match);
  EXPECT_FALSE(c.blocked);

  // CDN edge page: different length, headers and title.
  HttpResponse edge;
  edge.header_fields = {{"Via", "edge"}, {"X-Cache", "HIT"}};
  edge.body = "<html><title>Regional mirror</title><body>" + std::string(1500, 'e') + "</body></html>";
  edge.title_tag = "Regional mirror";
  auto e = ooni_compare(edge, control);
  EXPECT_EQ(e.title_match, std::optional<bool>(false));
  EXPECT_TRUE(e.blocked);

  // Short title words never get compared.
  edge.title_tag = "Hi all";
  EXPECT_FALSE(ooni_compare(edge, control).title_match);

  // Matching long title word rescues the page.
  edge.title_tag = "Welcome";
  EXPECT_EQ(ooni_compare(edge, control).title_match, std::optional<bool>(true));
  EXPECT_FALSE(ooni_compare(edge, control).blocked);
}

TEST(FetchDirect, RefusesHttps) {
  netsim::Network net(linear(3), 1);
  EXPECT_THROW(fetch_direct(net, kClient, "open001.example", server(), variant::Canonical{}, 443), Unsupported);
}

TEST(FetchDirect, SeesCensorAndClean) {
  netsim::Network net(linear(4, netsim::archetype("idea_im"), 2), 1);
  auto r = fetch_direct(net, kClient, "blocked001.example", server());
  EXPECT_TRUE(r.connected);
  EXPECT_TRUE(r.censor_reply);
  ASSERT_TRUE(r.response);
  EXPECT_NE(r.response->body.find("ideacellular.com/blocked"), std::string::npos);
  auto clean = fetch_clean(net, "blocked001.example", server());
  ASSERT_TRUE(clean);
  EXPECT_EQ(clean->body, netsim::default_site_body("blocked001.example"));
  auto ok = fetch_direct(net, kClient, "open001.example", server());
  EXPECT_FALSE(ok.censor_reply);
  EXPECT_TRUE(ok.genuine_reply);
}

TEST(TransportFiltering, Cases) {
  scenarios::LinearSpec spec;
  spec.routers = 3;
  spec.sites = {"a.example"};
  auto base = scenarios::linear_topology(spec);

  auto dropped = base;
  dropped.blackholes.push_back(netsim::BlackholeConfig{"r2", server(), std::nullopt});
  netsim::Network n1(netsim::build_topology(dropped), 1);
  EXPECT_EQ(detect_transport_filtering(n1, kClient, server()), TransportVerdict::TcpIpFiltered);

  auto flaky = base;
  flaky.blackholes.push_back(netsim::BlackholeConfig{"r2", server(), 3});
  netsim::Network n2(netsim::build_topology(flaky), 1);
  EXPECT_EQ(detect_transport_filtering(n2, kClient, server()), TransportVerdict::NotFiltered);

  auto down = base;
  down.web_servers[0].up = false;
  netsim::Network n3(netsim::build_topology(down), 1);
  EXPECT_THROW(detect_transport_filtering(n3, kClient, server()), SiteDown);
}

TEST(TriggerAnalysis, ArchetypesInspectRequests) {
  for (const auto& name : netsim::archetype_names()) {
    netsim::Network net(linear(5, certain(netsim::archetype(name)), 3), 2);
    EXPECT_EQ(trigger_analysis(net, kClient, "blocked001.example", server(), "open001.example"),
              TriggerVerdict::RequestOnly)
        << name;
  }
}

TEST(TriggerAnalysis, PlantedDirections) {
  using netsim::InspectDirection;
  for (auto [dir, want] : {std::pair{InspectDirection::ResponseOnly, TriggerVerdict::ResponseOnly},
                           std::pair{InspectDirection::Both, TriggerVerdict::Both}}) {
    auto sc = scenarios::trigger_scenario(dir);
    netsim::Network net(netsim::build_topology(sc.topology), 5);
    EXPECT_EQ(trigger_analysis(net, kClient, sc.pbw.front(), server(), "open001.example"), want);
  }
}

TEST(FuzzTriggerFields, OnlyHostTriggers) {
  netsim::Network net(linear(5, certain(netsim::archetype("airtel_wm")), 3), 2);
  auto p = fuzz_trigger_fields(net, kClient, server(), "blocked001.example", "open001.example");
  EXPECT_EQ(p, std::set<Placement>{Placement::HostField});
}

TEST(StatefulnessProbe, ArchetypesAreStateful) {
  for (const auto& name : netsim::archetype_names()) {
    netsim::Network net(linear(5, certain(netsim::archetype(name)), 3), 4);
    auto r = statefulness_probe(net, kClient, "blocked001.example", server());
    EXPECT_TRUE(r.stateful) << name;
    for (int n : r.script_censor_packets) EXPECT_EQ(n, 0) << name;
    EXPECT_GE(r.control_censor_packets, 1) << name;
  }
}

TEST(StatefulnessProbe, StatelessConfigTriggersOnBareGet) {
  auto mb = certain(netsim::archetype("airtel_wm"));
  mb.stateful = false;
  netsim::Network net(linear(5, mb, 3), 4);
  auto r = statefulness_probe(net, kClient, "blocked001.example", server());
  EXPECT_FALSE(r.stateful);
  EXPECT_GE(r.script_censor_packets[3], 1);
}

TEST(ClassifyMiddlebox, Archetypes) {
  struct Want {
    const char* name;
    netsim::MiddleboxKind kind;
    bool covert;
    std::optional<uint16_t> ip_id;
  };
  for (const auto& w : {Want{"airtel_wm", netsim::MiddleboxKind::WM, false, 242},
                        Want{"jio_wm", netsim::MiddleboxKind::WM, false, std::nullopt},
                        Want{"idea_im", netsim::MiddleboxKind::IM, false, std::nullopt},
                        Want{"vodafone_im", netsim::MiddleboxKind::IM, true, std::nullopt}}) {
    netsim::Network net(linear(6, netsim::archetype(w.name), 3), 17);
    auto ev = collect_evidence(net, kClient, "blocked001.example", server());
    auto c = classify_middlebox(ev);
    EXPECT_EQ(c.kind, w.kind) << w.name;
    EXPECT_EQ(c.covert, w.covert) << w.name;
    EXPECT_EQ(c.fixed_ip_id, w.ip_id) << w.name;
    EXPECT_EQ(c.stateful, std::optional<bool>(true)) << w.name;
    ASSERT_TRUE(c.location) << w.name;
    EXPECT_EQ(c.location->hop, 3) << w.name;
    auto j = to_json(c);
    EXPECT_EQ(j["kind"], netsim::to_string(w.kind));
  }
}

TEST(CollectEvidence, WmLetsGenuineResponsesThrough) {
  netsim::Network net(linear(6, netsim::archetype("airtel_wm"), 3), 1);
  auto ev = collect_evidence(net, kClient, "blocked001.example", server(), 20, false);
  // A tap cannot drop, so the server's page arrives alongside the notice.
  for (const auto& t : ev.trials) {
    EXPECT_TRUE(t.censor_reply);
    EXPECT_TRUE(t.genuine_reply);
    EXPECT_EQ(t.server_got_request, std::optional<bool>(true));
  }
}

TEST(ClassifyMiddlebox, NothingTriggeredIsUnclassified) {
  netsim::Network net(linear(4), 1);
  auto ev = collect_evidence(net, kClient, "blocked001.example", server(), 3, false);
  EXPECT_THROW(classify_middlebox(ev), Unclassified);
}
