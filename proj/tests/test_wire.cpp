#include <gtest/gtest.h>

#include <random>

#include "censorlab/config.hpp"
#include "censorlab/http.hpp"
#include "censorlab/wire.hpp"

using namespace censorlab;

TEST(Flags, RenderAndParse) {
  EXPECT_EQ(flags_str(tcp::kSyn | tcp::kAck), "SYN|ACK");
  EXPECT_EQ(flags_str(0), "-");
  EXPECT_EQ(flag_from_name("fin"), tcp::kFin);
  EXPECT_THROW(flag_from_name("URG"), std::invalid_argument);
}

TEST(TcpSegment, SequenceSpaceCountsSynAndFin) {
  TcpSegment s;
  s.flags = tcp::kSyn;
  EXPECT_EQ(s.seq_len(), 1u);
  s.flags = tcp::kFin | tcp::kAck;
  s.data = "abc";
  EXPECT_EQ(s.seq_len(), 4u);
}

TEST(SerializeHttp, CanonicalGet) {
  EXPECT_EQ(serialize_http(make_get("a.com")), "GET / HTTP/1.1\r\nHost: a.com\r\n\r\n");
}

TEST(SerializeHttp, PreservesKeywordCaseVerbatim) {
  RawHttpRequest r;
  r.request_line = "GET / HTTP/1.1";
  r.header_lines = {"HOST: a.com"};
  EXPECT_NE(serialize_http(r).find("HOST: a.com"), std::string::npos);
}

TEST(SerializeHttp, TrailingBytesFollowTerminator) {
  auto r = make_get("blocked.com");
  r.trailing_bytes = "Host: allowed.com\r\n\r\n";
  auto s = serialize_http(r);
  auto end = s.find("\r\n\r\n");
  ASSERT_NE(end, std::string::npos);
  EXPECT_EQ(s.substr(end + 4), "Host: allowed.com\r\n\r\n");
}

TEST(SegmentHttp, CutsAtOffsets) {
  auto r = make_get("a.com", variant::Fragmented{});
  auto parts = segment_http(r);
  ASSERT_EQ(parts.size(), 2u);
  EXPECT_TRUE(parts[0].size() >= 2 && parts[0].substr(parts[0].size() - 2) == "Ho");
  EXPECT_EQ(parts[0] + parts[1], serialize_http(r));
  EXPECT_EQ(segment_http(make_get("a.com")).size(), 1u);
}

TEST(ParseHttpServer, HostKeywordIsCaseInsensitive) {
  auto v = parse_http_server("GET / HTTP/1.1\r\nHOST: x.com\r\n\r\n");
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0], (ServerParsedRequest{"x.com", true}));
}

TEST(ParseHttpServer, DropsOptionalWhitespace) {
  auto v = parse_http_server("GET / HTTP/1.1\r\nHost:   x.com  \r\n\r\n");
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0], (ServerParsedRequest{"x.com", true}));
}

TEST(ParseHttpServer, SecondBlockIsMalformed) {
  auto v = parse_http_server("GET / HTTP/1.1\r\nHost: b.com\r\n\r\nHost: a.com");
  ASSERT_EQ(v.size(), 2u);
  EXPECT_EQ(v[0], (ServerParsedRequest{"b.com", true}));
  EXPECT_EQ(v[1], (ServerParsedRequest{"a.com", false}));
}

TEST(ParseHttpServer, DuplicateHostIsMalformedAndEmptyThrows) {
  auto v = parse_http_server("GET / HTTP/1.1\r\nHost: a.com\r\nHost: b.com\r\n\r\n");
  ASSERT_EQ(v.size(), 1u);
  EXPECT_FALSE(v[0].well_formed);
  EXPECT_THROW(parse_http_server(""), HttpParseError);
}

TEST(ParseHttpCensor, CanonicalMatch) {
  MatcherConfig strict;
  EXPECT_EQ(parse_http_censor("GET / HTTP/1.1\r\nHost: blocked.com\r\n\r\n", strict), "blocked.com");
}

TEST(ParseHttpCensor, CaseSensitiveKeywordMisses) {
  MatcherConfig cfg;
  cfg.keyword_case_sensitive = true;
  EXPECT_FALSE(parse_http_censor("GET / HTTP/1.1\r\nHOST: blocked.com\r\n\r\n", cfg));
}

TEST(ParseHttpCensor, LastHostWithTrailingScan) {
  MatcherConfig cfg;
  cfg.host_selection = HostSelection::LastHost;
  cfg.scan_trailing_bytes = true;
  EXPECT_EQ(parse_http_censor("GET / HTTP/1.1\r\nHost: blocked.com\r\n\r\nHost: allowed.com\r\n\r\n", cfg),
            "allowed.com");
}

TEST(ParseHttpCensor, SingleSpaceRule) {
  MatcherConfig cfg;
  cfg.require_single_space_after_colon = true;
  cfg.reject_trailing_whitespace = true;
  EXPECT_FALSE(parse_http_censor("GET / HTTP/1.1\r\nHost:  blocked.com\r\n\r\n", cfg));
  EXPECT_FALSE(parse_http_censor("GET / HTTP/1.1\r\nHost: blocked.com \r\n\r\n", cfg));
  EXPECT_EQ(parse_http_censor("GET / HTTP/1.1\r\nhost: blocked.com\r\n\r\n", cfg), "blocked.com");
}

TEST(ParseHttpCensor, DomainOutsideHostLineIsInvisible) {
  MatcherConfig cfg;
  EXPECT_FALSE(parse_http_censor("GET /blocked.com HTTP/1.1\r\nHost: ok.com\r\n\r\n", cfg) == std::optional<std::string>("blocked.com"));
  EXPECT_EQ(parse_http_censor("GET /blocked.com HTTP/1.1\r\nHost: ok.com\r\n\r\n", cfg), "ok.com");
}

TEST(ParseHttpCensor, TotalOnArbitraryBytes) {
  std::mt19937 gen(5);
  MatcherConfig cfgs[2];
  cfgs[1].host_selection = HostSelection::LastHost;
  cfgs[1].scan_trailing_bytes = true;
  for (int i = 0; i < 500; ++i) {
    std::string s(gen() % 200, '\0');
    for (auto& c : s) c = static_cast<char>(gen() % 256);
    if (i % 3 == 0) s = "Host:" + s;
    for (const auto& cfg : cfgs) {
      EXPECT_NO_THROW({
        auto a = parse_http_censor(s, cfg);
        auto b = parse_http_censor(s, cfg);
        EXPECT_EQ(a, b);
      });
    }
  }
}

TEST(MakeGet, Variants) {
  EXPECT_EQ(make_get("a.com").header_lines.front(), "Host: a.com");
  EXPECT_EQ(make_get("a.com", variant::KeywordCase{"HOst"}).header_lines.front(), "HOst: a.com");
  auto dh = make_get("blocked.com", variant::DoubleHost{"allowed.com"});
  EXPECT_NE(dh.trailing_bytes.find("Host: allowed.com"), std::string::npos);
  auto ws = make_get("a.com", variant::HostWhitespace{2, 1, false});
  EXPECT_EQ(ws.header_lines.front(), "Host:  a.com ");
  EXPECT_THROW(make_get(""), std::invalid_argument);
  EXPECT_THROW(make_get("a.com", variant::KeywordCase{"Hast"}), std::invalid_argument);
  EXPECT_THROW(make_get("a.com", variant::Fragmented{{5, 3}}), std::invalid_argument);
  EXPECT_THROW(make_get("a.com", variant::Fragmented{{1000}}), std::invalid_argument);
}

TEST(MakeGet, RoundTripsThroughServerParser) {
  std::vector<RequestVariant> vs = {variant::Canonical{}, variant::KeywordCase{"HOST"}, variant::KeywordCase{"hOsT"},
                                    variant::HostWhitespace{3, 2, false}, variant::HostWhitespace{1, 0, true},
                                    variant::DoubleHost{"allowed.com"}, variant::Fragmented{}};
  for (const auto& v : vs) {
    auto parsed = parse_http_server(serialize_http(make_get("blocked.com", v)));
    ASSERT_FALSE(parsed.empty()) << variant_name(v);
    EXPECT_EQ(parsed.front().host, "blocked.com") << variant_name(v);
    EXPECT_TRUE(parsed.front().well_formed) << variant_name(v);
  }
}

// Each archetype has at least one variant its matcher misses while the server still sees the host.
TEST(MakeGet, DivergenceWitnessPerArchetype) {
  std::vector<RequestVariant> catalog = {variant::KeywordCase{"HOST"}, variant::HostWhitespace{2, 0, false},
                                         variant::DoubleHost{"allowed.com"}};
  for (const auto& name : netsim::archetype_names()) {
    auto mb = netsim::archetype(name);
    bool witnessed = false;
    for (const auto& v : catalog) {
      auto bytes = serialize_http(make_get("blocked.com", v));
      auto censor = parse_http_censor(bytes, mb.matcher);
      if (censor != std::optional<std::string>("blocked.com") && parse_http_server(bytes).front().host == "blocked.com")
        witnessed = true;
    }
    EXPECT_TRUE(witnessed) << name;
  }
}

TEST(Variants, NamesRoundTrip) {
  for (const char* n : {"canonical", "keyword-case:HOst", "whitespace:2:0", "whitespace:1:1:tabs",
                        "double-host:allowed.com", "fragmented", "fragmented:3,9"})
    EXPECT_EQ(variant_name(parse_request_variant(n)), n);
  EXPECT_THROW(parse_request_variant("bogus"), std::invalid_argument);
}

TEST(HttpResponse, RenderParseAndTitle) {
  HttpResponse r;
  r.status = 200;
  r.header_fields = {{"Server", "x"}};
  r.body = "<html><title>Hello there</title></html>";
  auto text = render_response(r);
  EXPECT_NE(text.find("Content-Length: " + std::to_string(r.body.size())), std::string::npos);
  auto back = parse_http_responses(text + text.substr(0, 10));
  ASSERT_EQ(back.size(), 1u);
  EXPECT_EQ(back[0].body, r.body);
  EXPECT_EQ(back[0].title_tag, "Hello there");
  EXPECT_EQ(back[0].header("server"), "x");
  EXPECT_EQ(extract_title("<p>none</p>"), std::nullopt);
  EXPECT_EQ(reason_phrase(400), "Bad Request");
}

TEST(Wire, HexDumpAndDescribe) {
  auto dump = hex_dump("GET /");
  EXPECT_NE(dump.find("47 45 54 20 2f"), std::string::npos);
  EXPECT_NE(dump.find("GET /"), std::string::npos);
  Packet p;
  p.src = Ipv4Addr(1, 1, 1, 1);
  p.dst = Ipv4Addr(2, 2, 2, 2);
  p.payload = TcpSegment{1000, 80, 1, 0, tcp::kSyn, ""};
  EXPECT_NE(describe(p).find("SYN"), std::string::npos);
}
