#include "censorlab/scenarios.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <stdexcept>

namespace censorlab::scenarios {

using netsim::ClientConfig;
using netsim::HostConfig;
using netsim::MiddleboxConfig;
using netsim::ResolverConfig;
using netsim::RouterConfig;
using netsim::SiteConfig;
using netsim::TopologyConfig;
using netsim::WebServerConfig;

namespace {

Ipv4Addr A(const char* s) { return Ipv4Addr::from_string(s); }

Ipv4Addr offset(Ipv4Addr base, uint32_t k) { return Ipv4Addr{base.value + k}; }

std::vector<SiteConfig> sites_of(const std::vector<std::string>& domains) {
  std::vector<SiteConfig> out;
  for (const auto& d : domains) out.push_back(SiteConfig{d, std::nullopt, std::nullopt, {}});
  return out;
}

void link(TopologyConfig& t, const std::string& a, const std::string& b) { t.links.emplace_back(a, b); }

std::vector<std::string> concat(std::vector<std::string> a, const std::vector<std::string>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

}  // namespace

std::vector<std::string> numbered_domains(const std::string& stem, int count) {
  std::vector<std::string> out;
  char buf[96];
  for (int i = 1; i <= count; ++i) {
    std::snprintf(buf, sizeof buf, "%s%03d.example", stem.c_str(), i);
    out.emplace_back(buf);
  }
  return out;
}

Ipv4Addr linear_server_addr() { return A("93.184.216.34"); }
Ipv4Addr linear_resolver_addr() { return A("9.9.9.9"); }

TopologyConfig linear_topology(const LinearSpec& spec) {
  if (spec.routers < 1) throw std::invalid_argument("a linear topology needs at least one router");
  TopologyConfig t;
  t.name = spec.name;
  t.clients.push_back(ClientConfig{kLinearClient, A("117.200.0.2"), spec.client_as});
  t.as_prefixes[spec.client_as] = {Prefix::from_string("117.200.0.0/16")};
  for (int i = 1; i <= spec.routers; ++i) {
    RouterConfig r;
    r.id = "r" + std::to_string(i);
    r.addr = Ipv4Addr(61, 1, static_cast<uint8_t>(i), 1);
    r.as_label = static_cast<size_t>(i) <= spec.router_as.size() ? spec.router_as[i - 1] : "Transit-AS";
    r.anonymized = spec.anonymized.count(i) > 0;
    t.routers.push_back(r);
    link(t, i == 1 ? kLinearClient : "r" + std::to_string(i - 1), r.id);
  }
  std::string last = "r" + std::to_string(spec.routers);
  WebServerConfig s;
  s.id = "server";
  s.addr = linear_server_addr();
  s.as_label = "Host-AS";
  s.ports = spec.ports;
  s.sites = sites_of(spec.sites);
  t.web_servers.push_back(s);
  link(t, last, "server");
  ResolverConfig res;
  res.id = "resolver";
  res.addr = linear_resolver_addr();
  res.as_label = "Resolver-AS";
  t.resolvers.push_back(res);
  link(t, last, "resolver");
  for (const auto& d : spec.sites) t.authoritative_dns[d] = {s.addr};
  if (!spec.blocklist.empty()) t.blocklists["pbw"] = {spec.blocklist.begin(), spec.blocklist.end()};
  for (auto [at, mb] : spec.middleboxes) {
    if (at < 1 || at > spec.routers) throw std::invalid_argument("middlebox attach index out of range");
    mb.attach = "r" + std::to_string(at);
    if (mb.blocklist.empty() && mb.blocklist_ref.empty() && !spec.blocklist.empty()) mb.blocklist_ref = "pbw";
    t.middleboxes.push_back(mb);
  }
  return t;
}

namespace {

std::string isp_as(const std::string& archetype) {
  if (archetype == "airtel_wm") return "Airtel-AS";
  if (archetype == "jio_wm") return "Jio-AS";
  if (archetype == "idea_im") return "Idea-AS";
  if (archetype == "vodafone_im") return "Vodafone-AS";
  return "ISP-AS";
}

}  // namespace

Scenario archetype_scenario(const std::string& archetype) {
  auto blocked = numbered_domains("blocked", 10);
  auto allowed = numbered_domains("open", 10);
  LinearSpec spec;
  spec.name = archetype;
  spec.routers = 6;
  spec.client_as = isp_as(archetype);
  spec.router_as = std::vector<std::string>(6, spec.client_as);
  spec.router_as[5] = "Transit-AS";
  spec.sites = concat(blocked, allowed);
  spec.blocklist = blocked;
  spec.middleboxes.emplace_back(3, netsim::archetype(archetype));
  Scenario s;
  s.name = archetype;
  s.topology = linear_topology(spec);
  s.pbw = concat(blocked, allowed);
  auto server = linear_server_addr().str();
  s.campaign = {
      {"name", archetype},
      {"topology", "topology.json"},
      {"pbw", "pbw.txt"},
      {"seed", 17},
      {"client", kLinearClient},
      {"plan", {"tcpip", "http", "classify", "evade", "metrics"}},
      {"http", {{"server", server}}},
      {"classify", {{"server", server}, {"trials", 20}, {"max_domains", 3}}},
      {"evade", {{"server", server}, {"allowed_domain", allowed.front()}, {"max_domains", 3}}},
      {"trace", {{"kind", "http"}, {"domain", blocked.front()}, {"dst", server}}},
  };
  return s;
}

Scenario trigger_scenario(netsim::InspectDirection dir) {
  auto s = archetype_scenario("airtel_wm");
  s.name = "trigger_" + netsim::to_string(dir);
  s.topology.name = s.name;
  s.topology.middleboxes[0].inspect = dir;
  s.campaign["name"] = s.name;
  return s;
}

namespace {

// Per-domain blocking counts for the MTNL-like plant: one domain blocked
// everywhere so every poisoned resolver is detectable, the rest spread
// linearly and nudged so the total is exact.
std::vector<int> planted_counts(int domains, int units, int total) {
  std::vector<int> c(static_cast<size_t>(domains));
  c[0] = units;
  int rest = domains - 1;
  int avg = (total - units) / rest;
  int lo = std::max(1, avg / 8), hi = std::min(units - 1, 2 * avg - lo);
  int sum = units;
  for (int k = 0; k < rest; ++k) {
    c[static_cast<size_t>(k + 1)] = lo + (hi - lo) * k / std::max(1, rest - 1);
    sum += c[static_cast<size_t>(k + 1)];
  }
  for (int k = 1; sum != total; k = k % rest + 1) {
    int step = sum < total ? 1 : -1;
    int next = c[static_cast<size_t>(k)] + step;
    if (next >= 1 && next < units) {
      c[static_cast<size_t>(k)] = next;
      sum += step;
    }
  }
  return c;
}

struct DnsPlant {
  std::string name;
  std::string isp_as;
  Prefix isp_prefix;
  Ipv4Addr client_addr;
  Ipv4Addr resolver_base;
  Prefix scan_range;
  int resolvers;
  int poisoned;
  int blocked_domains;
  int control_domains;
  std::vector<int> counts;  // per blocked domain, resolvers poisoning it
  std::vector<Ipv4Addr> answers;
  int misconfigured;
  int silent_hosts;
};

Scenario dns_scenario(const DnsPlant& p, std::optional<double> reference) {
  Scenario s;
  s.name = p.name;
  auto& t = s.topology;
  t.name = p.name;
  auto blocked = numbered_domains("pbw", p.blocked_domains);
  auto control = numbered_domains("control", p.control_domains);
  auto all = concat(blocked, control);
  t.clients.push_back(ClientConfig{"client", p.client_addr, p.isp_as});
  t.as_prefixes[p.isp_as] = {p.isp_prefix};
  t.routers.push_back(RouterConfig{"r1", offset(p.isp_prefix.first(), 0xfa01), p.isp_as, false});
  t.routers.push_back(RouterConfig{"r2", offset(p.isp_prefix.first(), 0xfa02), p.isp_as, false});
  link(t, "client", "r1");
  link(t, "r1", "r2");
  WebServerConfig server;
  server.id = "server";
  server.addr = A("93.184.216.34");
  server.as_label = "Host-AS";
  server.sites = sites_of(all);
  t.web_servers.push_back(server);
  link(t, "r2", "server");
  for (const auto& d : all) t.authoritative_dns[d] = {server.addr};
  t.authoritative_dns["probe.censorlab.example"] = {A("198.41.0.4")};

  int k = 0;
  for (int i = 0; i < p.resolvers; ++i, ++k) {
    ResolverConfig r;
    r.id = "res" + std::to_string(i + 1);
    r.addr = offset(p.resolver_base, static_cast<uint32_t>(k));
    r.as_label = p.isp_as;
    if (i < p.poisoned) {
      auto answer = p.answers[static_cast<size_t>(i) % p.answers.size()];
      for (size_t d = 0; d < blocked.size(); ++d) {
        // Domain d is poisoned by a window of counts[d] resolvers starting at a per-domain offset.
        int start = static_cast<int>(d * 37) % p.poisoned;
        int pos = (i - start + p.poisoned) % p.poisoned;
        if (pos < p.counts[d]) r.poisoned_map[blocked[d]] = answer;
      }
    }
    t.resolvers.push_back(r);
    link(t, "r2", r.id);
  }
  for (int i = 0; i < p.misconfigured; ++i, ++k) {
    ResolverConfig r;
    r.id = "misconf" + std::to_string(i + 1);
    r.addr = offset(p.resolver_base, static_cast<uint32_t>(k));
    r.as_label = p.isp_as;
    r.honest_map["probe.censorlab.example"] = {A("198.41.0.99")};
    t.resolvers.push_back(r);
    link(t, "r2", r.id);
  }
  for (int i = 0; i < p.silent_hosts; ++i, ++k) {
    t.hosts.push_back(HostConfig{"host" + std::to_string(i + 1), offset(p.resolver_base, static_cast<uint32_t>(k)),
                                 p.isp_as});
    link(t, "r2", "host" + std::to_string(i + 1));
  }
  // An honest public resolver outside the ISP, used as the alternate.
  t.resolvers.push_back(ResolverConfig{"public", A("9.9.9.9"), "Resolver-AS", {}, {}, true});
  link(t, "r2", "public");

  s.pbw = all;
  json dns = {{"resolver_ranges", {p.scan_range.str()}},
              {"probe_domain", "probe.censorlab.example"},
              {"known_answer", "198.41.0.4"},
              {"whitelist", json::array()},
              {"mechanism", true}};
  if (reference) dns["reference_coverage"] = *reference;
  s.campaign = {{"name", p.name},
                {"topology", "topology.json"},
                {"pbw", "pbw.txt"},
                {"seed", 17},
                {"client", "client"},
                {"plan", {"dns", "evade", "metrics"}},
                {"dns", dns},
                {"evade",
                 {{"type", "dns"},
                  {"resolver", p.resolver_base.str()},
                  {"alt_resolver", "9.9.9.9"},
                  {"domains", {blocked[0]}}}}};
  return s;
}

Scenario mtnl_dns() {
  DnsPlant p;
  p.name = "mtnl_dns";
  p.isp_as = "MTNL-AS";
  p.isp_prefix = Prefix::from_string("59.185.0.0/16");
  p.client_addr = A("59.185.100.2");
  p.resolver_base = A("59.185.0.1");
  p.scan_range = Prefix::from_string("59.185.0.0/23");
  p.resolvers = 448;
  p.poisoned = 383;
  p.blocked_domains = 50;
  p.control_domains = 10;
  p.counts = planted_counts(50, 383, 8120);
  p.answers = {A("59.185.200.1"), A("59.185.200.2"), A("59.185.200.3")};
  p.misconfigured = 6;
  p.silent_hosts = 6;
  return dns_scenario(p, 0.77);
}

Scenario bsnl_dns() {
  DnsPlant p;
  p.name = "bsnl_dns";
  p.isp_as = "BSNL-AS";
  p.isp_prefix = Prefix::from_string("117.192.0.0/12");
  p.client_addr = A("117.201.0.2");
  p.resolver_base = A("117.200.0.1");
  p.scan_range = Prefix::from_string("117.200.0.0/24");
  p.resolvers = 182;
  p.poisoned = 17;
  p.blocked_domains = 30;
  p.control_domains = 10;
  p.counts = planted_counts(30, 17, 17 * 30 * 3 / 10 + 17);
  p.answers = {A("10.10.34.34"), A("10.10.34.35"), A("10.10.34.36")};
  p.misconfigured = 3;
  p.silent_hosts = 3;
  return dns_scenario(p, std::nullopt);
}

Scenario dns_injection() {
  auto blocked = numbered_domains("pbw", 10);
  auto control = numbered_domains("control", 5);
  LinearSpec spec;
  spec.name = "dns_injection";
  spec.routers = 4;
  spec.client_as = "ISP-AS";
  spec.router_as = {"ISP-AS", "ISP-AS", "Transit-AS", "Transit-AS"};
  spec.sites = concat(blocked, control);
  spec.blocklist = blocked;
  MiddleboxConfig mb;
  mb.id = "dns_injector";
  mb.kind = netsim::MiddleboxKind::WM;
  mb.dns_forge_answer = A("49.44.0.1");
  spec.middleboxes.emplace_back(2, mb);
  Scenario s;
  s.name = spec.name;
  s.topology = linear_topology(spec);
  s.pbw = concat(blocked, control);
  s.campaign = {{"name", s.name},
                {"topology", "topology.json"},
                {"pbw", "pbw.txt"},
                {"seed", 17},
                {"client", kLinearClient},
                {"plan", {"dns", "metrics"}},
                {"dns", {{"resolvers", {linear_resolver_addr().str()}}, {"whitelist", json::array()}, {"mechanism", true}}},
                {"trace", {{"kind", "dns"}, {"domain", blocked.front()}, {"dst", linear_resolver_addr().str()}}}};
  return s;
}

// client - r1 - r2 - {aggA (censor), aggB} - servers
Scenario internal_coverage(const std::string& name, const std::string& archetype, int censored, int total) {
  auto blocked = numbered_domains("blocked", 5);
  auto allowed = numbered_domains("open", 5);
  Scenario s;
  s.name = name;
  auto& t = s.topology;
  t.name = name;
  auto as = isp_as(archetype);
  t.clients.push_back(ClientConfig{"client", A("49.32.0.2"), as});
  t.as_prefixes[as] = {Prefix::from_string("49.32.0.0/16")};
  t.routers.push_back(RouterConfig{"r1", A("49.32.250.1"), as, false});
  t.routers.push_back(RouterConfig{"r2", A("49.32.250.2"), as, false});
  t.routers.push_back(RouterConfig{"aggA", A("49.32.250.3"), as, false});
  t.routers.push_back(RouterConfig{"aggB", A("49.32.250.4"), as, false});
  link(t, "client", "r1");
  link(t, "r1", "r2");
  link(t, "r2", "aggA");
  link(t, "r2", "aggB");
  Ipv4Addr base = A("104.16.0.10");
  for (int i = 0; i < total; ++i) {
    WebServerConfig w;
    char id[16];
    std::snprintf(id, sizeof id, "t%04d", i + 1);
    w.id = id;
    w.addr = offset(base, static_cast<uint32_t>(i));
    w.as_label = "Host-AS";
    t.web_servers.push_back(w);
    link(t, i < censored ? "aggA" : "aggB", w.id);
  }
  t.blocklists["pbw"] = {blocked.begin(), blocked.end()};
  auto mb = netsim::archetype(archetype);
  mb.attach = "aggA";
  mb.blocklist_ref = "pbw";
  t.middleboxes.push_back(mb);
  s.pbw = concat(blocked, allowed);
  json prefixes = json::array();
  // Cover the target block with aligned prefixes.
  for (uint32_t v = base.value; v < base.value + static_cast<uint32_t>(total);) {
    uint8_t len = 32;
    while (len > 16) {
      uint32_t size = 1u << (32 - (len - 1));
      if (v % size != 0 || v + size > base.value + static_cast<uint32_t>(total)) break;
      --len;
    }
    prefixes.push_back(Prefix(Ipv4Addr{v}, len).str());
    v += 1u << (32 - len);
  }
  s.campaign = {{"name", name},
                {"topology", "topology.json"},
                {"pbw", "pbw.txt"},
                {"seed", 17},
                {"client", "client"},
                {"plan", {"metrics"}},
                {"coverage", {{"internal", {{"target_prefixes", prefixes}}}}}};
  return s;
}

// Two external vantages reaching 40 prefixes of three port-80 hosts each.
Scenario external_coverage(const std::string& name, const std::string& archetype, bool source_restricted) {
  auto blocked = numbered_domains("blocked", 5);
  auto allowed = numbered_domains("open", 5);
  Scenario s;
  s.name = name;
  auto& t = s.topology;
  t.name = name;
  auto as = isp_as(archetype);
  t.clients.push_back(ClientConfig{"ext-1", A("128.112.0.2"), "Academic-AS"});
  t.clients.push_back(ClientConfig{"ext-2", A("171.64.0.2"), "Academic-AS"});
  t.routers.push_back(RouterConfig{"x1", A("128.112.250.1"), "Academic-AS", false});
  t.routers.push_back(RouterConfig{"x2", A("171.64.250.1"), "Academic-AS", false});
  t.routers.push_back(RouterConfig{"core", A("4.69.0.1"), "Transit-AS", false});
  link(t, "ext-1", "x1");
  link(t, "ext-2", "x2");
  link(t, "x1", "core");
  link(t, "x2", "core");
  json prefixes = json::array();
  for (int k = 0; k < 40; ++k) {
    Ipv4Addr net(42, 104, static_cast<uint8_t>(k), 0);
    std::string pr = "pr" + std::to_string(k + 1);
    t.routers.push_back(RouterConfig{pr, offset(net, 1), as, false});
    link(t, "core", pr);
    for (int h = 0; h < 3; ++h) {
      WebServerConfig w;
      w.id = pr + "-h" + std::to_string(h + 1);
      w.addr = offset(net, static_cast<uint32_t>(2 + h));
      w.as_label = as;
      t.web_servers.push_back(w);
      link(t, pr, w.id);
    }
    prefixes.push_back(Prefix(net, 28).str());
  }
  t.as_prefixes[as] = {Prefix::from_string("42.104.0.0/16")};
  t.blocklists["pbw"] = {blocked.begin(), blocked.end()};
  auto mb = netsim::archetype(archetype);
  mb.attach = "pr1";
  mb.blocklist_ref = "pbw";
  if (source_restricted) {
    // Only the ISP's own subscribers are inspected.
    mb.source_prefixes = {Prefix::from_string("49.32.0.0/16")};
    t.clients.push_back(ClientConfig{"subscriber", A("49.32.0.2"), as});
    t.as_prefixes[as].push_back(Prefix::from_string("49.32.0.0/16"));
    link(t, "subscriber", "pr1");
  }
  t.middleboxes.push_back(mb);
  s.pbw = concat(blocked, allowed);
  s.campaign = {{"name", name},
                {"topology", "topology.json"},
                {"pbw", "pbw.txt"},
                {"seed", 17},
                {"client", "ext-1"},
                {"plan", {"metrics"}},
                {"coverage", {{"external", {{"vantages", {"ext-1", "ext-2"}}, {"prefixes", prefixes}}}}}};
  return s;
}

Scenario nkn_collateral() {
  auto blocked = numbered_domains("blocked", 69);
  auto allowed = numbered_domains("open", 31);
  LinearSpec spec;
  spec.name = "nkn_collateral";
  spec.routers = 4;
  spec.client_as = "NKN-AS";
  spec.router_as = {"NKN-AS", "NKN-AS", "Vodafone-AS", "Vodafone-AS"};
  spec.sites = concat(blocked, allowed);
  spec.blocklist = blocked;
  spec.middleboxes.emplace_back(3, netsim::archetype("vodafone_im"));
  Scenario s;
  s.name = spec.name;
  s.topology = linear_topology(spec);
  s.topology.clients[0].addr = A("14.139.0.2");
  s.topology.as_prefixes.clear();
  s.topology.as_prefixes["NKN-AS"] = {Prefix::from_string("14.139.0.0/16")};
  s.pbw = concat(blocked, allowed);
  auto server = linear_server_addr().str();
  s.campaign = {{"name", s.name},
                {"topology", "topology.json"},
                {"pbw", "pbw.txt"},
                {"seed", 17},
                {"client", kLinearClient},
                {"plan", {"http", "classify", "metrics"}},
                {"http", {{"server", server}}},
                {"classify",
                 {{"server", server}, {"trials", 3}, {"probe_state", false}, {"collateral", {{"victim_as", "NKN-AS"}}}}}};
  return s;
}

// 200 sites: 50 served differently at the edge, 30 behind an always-winning tap.
Scenario ooni_corpus() {
  auto censored = numbered_domains("blocked", 30);
  auto dynamic = numbered_domains("cdn", 50);
  auto plain = numbered_domains("site", 120);
  auto all = concat(concat(censored, dynamic), plain);
  LinearSpec spec;
  spec.name = "ooni_corpus";
  spec.routers = 4;
  spec.client_as = "Airtel-AS";
  spec.router_as = {"Airtel-AS", "Airtel-AS", "Airtel-AS", "Transit-AS"};
  spec.sites = all;
  spec.blocklist = censored;
  auto mb = netsim::archetype("airtel_wm");
  mb.injection_delay_ticks = netsim::delay_for_win_probability(1.0);
  spec.middleboxes.emplace_back(2, mb);
  Scenario s;
  s.name = spec.name;
  s.topology = linear_topology(spec);
  auto& sites = s.topology.web_servers[0].sites;
  int n = 0;
  for (auto& site : sites) {
    if (site.domain.rfind("cdn", 0) != 0) continue;
    // Every other edge page carries a location-dependent feed that changes its length.
    std::string feed;
    if (n++ % 2 == 0)
      for (int i = 1; i <= 12; ++i)
        feed += "<li>Local headline " + std::to_string(i) + " for subscribers near this edge node</li>";
    site.edge_body = "<html><head><title>Regional mirror landing</title></head><body><p>Served from edge node "
                     "for " + site.domain + "</p><ul>" + feed + "</ul></body></html>";
    site.edge_headers = {{"Via", "1.1 edge-cache"}, {"X-Cache", "HIT"}};
  }
  s.pbw = all;
  auto server = linear_server_addr().str();
  s.campaign = {{"name", s.name},
                {"topology", "topology.json"},
                {"pbw", "pbw.txt"},
                {"seed", 17},
                {"client", kLinearClient},
                {"plan", {"http", "metrics"}},
                {"http", {{"server", server}, {"ooni_baseline", true}}},
                {"truth", {{"censored", censored}}}};
  return s;
}

}  // namespace

std::vector<std::string> names() {
  return {"mtnl_dns",     "bsnl_dns",      "dns_injection", "airtel_wm",         "jio_wm",       "idea_im", "vodafone_im",
          "nkn_collateral", "idea_coverage", "jio_coverage",  "vodafone_external", "jio_external", "ooni_corpus"};
}

Scenario build(std::string_view name) {
  if (name == "mtnl_dns") return mtnl_dns();
  if (name == "bsnl_dns") return bsnl_dns();
  if (name == "dns_injection") return dns_injection();
  if (name == "airtel_wm" || name == "jio_wm" || name == "idea_im" || name == "vodafone_im")
    return archetype_scenario(std::string(name));
  if (name == "nkn_collateral") return nkn_collateral();
  if (name == "idea_coverage") return internal_coverage("idea_coverage", "idea_im", 92, 100);
  if (name == "jio_coverage") return internal_coverage("jio_coverage", "jio_wm", 64, 1000);
  if (name == "vodafone_external") return external_coverage("vodafone_external", "vodafone_im", false);
  if (name == "jio_external") return external_coverage("jio_external", "jio_wm", true);
  if (name == "ooni_corpus") return ooni_corpus();
  throw std::invalid_argument("unknown scenario '" + std::string(name) + "'");
}

std::string render_pbw(const std::vector<std::string>& pbw) {
  std::string out;
  for (const auto& d : pbw) out += d + "\n";
  return out;
}

std::vector<std::string> parse_pbw(std::string_view text) {
  std::vector<std::string> out;
  while (!text.empty()) {
    auto nl = text.find('\n');
    auto line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    while (!line.empty() && std::isspace(static_cast<unsigned char>(line.front()))) line.remove_prefix(1);
    while (!line.empty() && std::isspace(static_cast<unsigned char>(line.back()))) line.remove_suffix(1);
    if (!line.empty()) out.push_back(to_lower(line));
  }
  return out;
}

std::map<std::string, std::string> render_files(const Scenario& s) {
  return {{"topology.json", netsim::topology_to_json(s.topology).dump(2) + "\n"},
          {"pbw.txt", render_pbw(s.pbw)},
          {"campaign.json", s.campaign.dump(2) + "\n"}};
}

}  // namespace censorlab::scenarios
