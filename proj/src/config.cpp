#include <cmath>

#include "censorlab/json_io.hpp"

namespace censorlab {

json packet_to_json(const Packet& p) {
  json j;
  j["src"] = p.src.str();
  j["dst"] = p.dst.str();
  j["ttl"] = p.ttl;
  j["ip_id"] = p.ip_id;
  if (auto* t = p.tcp()) {
    j["proto"] = "tcp";
    j["sport"] = t->sport;
    j["dport"] = t->dport;
    j["seq"] = t->seq;
    j["ack"] = t->ack;
    j["flags"] = flags_str(t->flags);
    j["data"] = t->data;
  } else if (auto* d = p.dns()) {
    j["proto"] = "dns";
    j["kind"] = d->kind == DnsKind::Query ? "query" : "response";
    j["txid"] = d->txid;
    j["qname"] = d->qname;
    json answers = json::array();
    for (const auto& a : d->answers) answers.push_back(a.str());
    j["answers"] = answers;
  } else if (auto* i = p.icmp()) {
    j["proto"] = "icmp";
    j["type"] = "time-exceeded";
    j["orig_dst"] = i->orig_dst.str();
    j["orig_ip_id"] = i->orig_ip_id;
  }
  return j;
}

namespace netsim {

namespace {

const HeaderList kServerLikeHeaders = {{"Server", "nginx"}, {"Content-Type", "text/html"}};

std::string join_ptr(const std::string& base, const std::string& key) { return base + "/" + key; }

const json& require(const json& obj, const char* key, const std::string& ptr) {
  if (!obj.is_object()) throw ConfigError("expected an object", ptr);
  auto it = obj.find(key);
  if (it == obj.end()) throw ConfigError(std::string("missing field '") + key + "'", ptr);
  return *it;
}

std::string as_string(const json& v, const std::string& ptr) {
  if (!v.is_string()) throw ConfigError("expected a string", ptr);
  return v.get<std::string>();
}

bool as_bool(const json& v, const std::string& ptr) {
  if (!v.is_boolean()) throw ConfigError("expected true/false", ptr);
  return v.get<bool>();
}

int64_t as_int(const json& v, const std::string& ptr, int64_t lo, int64_t hi) {
  if (!v.is_number_integer()) throw ConfigError("expected an integer", ptr);
  auto n = v.get<int64_t>();
  if (n < lo || n > hi) throw ConfigError("integer out of range [" + std::to_string(lo) + ", " + std::to_string(hi) + "]", ptr);
  return n;
}

Ipv4Addr as_addr(const json& v, const std::string& ptr) {
  auto s = as_string(v, ptr);
  auto a = Ipv4Addr::parse(s);
  if (!a) throw ConfigError("bad IPv4 address '" + s + "'", ptr);
  return *a;
}

Prefix as_prefix(const json& v, const std::string& ptr) {
  try {
    return Prefix::from_string(as_string(v, ptr));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what(), ptr);
  }
}

template <typename F>
void each(const json& arr, const std::string& ptr, F&& f) {
  if (!arr.is_array()) throw ConfigError("expected an array", ptr);
  for (size_t i = 0; i < arr.size(); ++i) f(arr[i], join_ptr(ptr, std::to_string(i)));
}

std::string opt_string(const json& obj, const char* key, const std::string& ptr, std::string dflt = {}) {
  auto it = obj.find(key);
  return it == obj.end() ? dflt : as_string(*it, join_ptr(ptr, key));
}

bool opt_bool(const json& obj, const char* key, const std::string& ptr, bool dflt) {
  auto it = obj.find(key);
  return it == obj.end() ? dflt : as_bool(*it, join_ptr(ptr, key));
}

uint8_t flags_from_json(const json& v, const std::string& ptr) {
  uint8_t flags = 0;
  each(v, ptr, [&](const json& f, const std::string& p) {
    try {
      flags |= flag_from_name(as_string(f, p));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what(), p);
    }
  });
  return flags;
}

json flags_to_json(uint8_t flags) {
  json arr = json::array();
  for (uint8_t bit : {tcp::kSyn, tcp::kAck, tcp::kFin, tcp::kRst, tcp::kPsh})
    if (flags & bit) arr.push_back(flags_str(bit));
  return arr;
}

HeaderList headers_from_json(const json& v, const std::string& ptr) {
  HeaderList out;
  each(v, ptr, [&](const json& h, const std::string& p) {
    if (!h.is_array() || h.size() != 2) throw ConfigError("expected [name, value]", p);
    out.emplace_back(as_string(h[0], p + "/0"), as_string(h[1], p + "/1"));
  });
  return out;
}

json headers_to_json(const HeaderList& h) {
  json arr = json::array();
  for (const auto& [n, v] : h) arr.push_back(json::array({n, v}));
  return arr;
}

json addrs_to_json(const std::vector<Ipv4Addr>& v) {
  json arr = json::array();
  for (const auto& a : v) arr.push_back(a.str());
  return arr;
}

std::vector<Ipv4Addr> addrs_from_json(const json& v, const std::string& ptr) {
  std::vector<Ipv4Addr> out;
  each(v, ptr, [&](const json& a, const std::string& p) { out.push_back(as_addr(a, p)); });
  return out;
}

MatcherConfig matcher_from_json(const json& j, const std::string& ptr) {
  MatcherConfig m;
  if (!j.is_object()) throw ConfigError("expected an object", ptr);
  m.keyword_case_sensitive = opt_bool(j, "keyword_case_sensitive", ptr, false);
  m.require_single_space_after_colon = opt_bool(j, "require_single_space_after_colon", ptr, false);
  m.reject_trailing_whitespace = opt_bool(j, "reject_trailing_whitespace", ptr, false);
  m.scan_trailing_bytes = opt_bool(j, "scan_trailing_bytes", ptr, false);
  auto sel = opt_string(j, "host_selection", ptr, "first");
  if (sel == "first") m.host_selection = HostSelection::FirstHost;
  else if (sel == "last") m.host_selection = HostSelection::LastHost;
  else throw ConfigError("host_selection must be 'first' or 'last'", join_ptr(ptr, "host_selection"));
  auto ports = opt_string(j, "ports", ptr, "80");
  if (ports == "80") m.ports = PortScope::Port80Only;
  else if (ports == "all") m.ports = PortScope::AllPorts;
  else throw ConfigError("ports must be '80' or 'all'", join_ptr(ptr, "ports"));
  return m;
}

json matcher_to_json(const MatcherConfig& m) {
  json j;
  j["keyword_case_sensitive"] = m.keyword_case_sensitive;
  j["require_single_space_after_colon"] = m.require_single_space_after_colon;
  j["reject_trailing_whitespace"] = m.reject_trailing_whitespace;
  j["host_selection"] = m.host_selection == HostSelection::FirstHost ? "first" : "last";
  j["scan_trailing_bytes"] = m.scan_trailing_bytes;
  j["ports"] = m.ports == PortScope::Port80Only ? "80" : "all";
  return j;
}

}  // namespace

std::string to_string(MiddleboxKind k) { return k == MiddleboxKind::IM ? "IM" : "WM"; }

std::string to_string(InspectDirection d) {
  switch (d) {
    case InspectDirection::RequestOnly: return "RequestOnly";
    case InspectDirection::ResponseOnly: return "ResponseOnly";
    case InspectDirection::Both: return "Both";
  }
  return "?";
}

InspectDirection inspect_from_string(std::string_view s) {
  if (s == "RequestOnly") return InspectDirection::RequestOnly;
  if (s == "ResponseOnly") return InspectDirection::ResponseOnly;
  if (s == "Both") return InspectDirection::Both;
  throw ConfigError("inspect must be RequestOnly, ResponseOnly or Both");
}

void MiddleboxConfig::validate() const {
  auto where = "middlebox '" + id + "': ";
  if (kind == MiddleboxKind::IM && !drop_flow_after_trigger)
    throw ConfigError(where + "an IM must drop the flow after triggering");
  if (kind == MiddleboxKind::WM && drop_flow_after_trigger)
    throw ConfigError(where + "a WM is a tap and cannot drop packets");
  if (covert && !notification.body_template.empty())
    throw ConfigError(where + "covert censors send no notification body");
  if (covert && kind != MiddleboxKind::IM) throw ConfigError(where + "covert censorship is modeled for IMs only");
  if (state_timeout_ticks <= 0) throw ConfigError(where + "state_timeout_ticks must be positive");
  if (injection_delay_ticks.empty()) throw ConfigError(where + "injection delay distribution is empty");
  double total = 0;
  for (const auto& d : injection_delay_ticks) {
    if (d.ticks < 0 || d.weight < 0) throw ConfigError(where + "negative injection delay or weight");
    total += d.weight;
  }
  if (total <= 0) throw ConfigError(where + "injection delay weights sum to zero");
}

std::vector<DelayOutcome> delay_for_win_probability(double p) {
  if (p < 0 || p > 1) throw std::invalid_argument("win probability outside [0, 1]");
  if (p == 1.0) return {{0, 1.0}};
  if (p == 0.0) return {{2, 1.0}};
  return {{0, p}, {2, 1.0 - p}};
}

const std::vector<FingerprintEntry>& fingerprint_registry() {
  static const std::vector<FingerprintEntry> kRegistry = {
      {"airtel.com/dot", "Airtel-AS"},
      {"49.44.79.236", "Jio-AS"},
      {"ideacellular.com/blocked", "Idea-AS"},
  };
  return kRegistry;
}

std::optional<FingerprintEntry> match_fingerprint(std::string_view body) {
  for (const auto& e : fingerprint_registry())
    if (body.find(e.fingerprint) != std::string_view::npos) return e;
  return std::nullopt;
}

std::vector<std::string> archetype_names() { return {"airtel_wm", "jio_wm", "idea_im", "vodafone_im"}; }

MiddleboxConfig archetype(std::string_view name) {
  MiddleboxConfig mb;
  mb.id = std::string(name);
  if (name == "airtel_wm") {
    mb.kind = MiddleboxKind::WM;
    mb.matcher.keyword_case_sensitive = true;
    mb.notification.body_template =
        "<html><head></head><body><iframe src=\"http://www.airtel.com/dot/\" width=\"100%\" height=\"100%\" "
        "frameborder=\"0\"></iframe></body></html>";
    mb.notification.headers = kServerLikeHeaders;
    mb.notification.ip_id.fixed = 242;
    mb.notification.fingerprint = "airtel.com/dot";
    mb.send_rst_followup = true;
    mb.injection_delay_ticks = delay_for_win_probability(0.7);
  } else if (name == "jio_wm") {
    mb.kind = MiddleboxKind::WM;
    mb.matcher.keyword_case_sensitive = true;
    mb.notification.body_template =
        "<html><head><meta http-equiv=\"refresh\" content=\"0; url=http://49.44.79.236/\"></head><body></body></html>";
    mb.notification.headers = kServerLikeHeaders;
    mb.notification.fingerprint = "49.44.79.236";
    mb.send_rst_followup = true;
    mb.injection_delay_ticks = delay_for_win_probability(0.7);
  } else if (name == "idea_im") {
    mb.kind = MiddleboxKind::IM;
    mb.matcher.require_single_space_after_colon = true;
    mb.matcher.reject_trailing_whitespace = true;
    mb.matcher.ports = PortScope::AllPorts;
    mb.notification.body_template =
        "<html><body><p>The requested URL {domain} is not available.</p>"
        "<a href=\"http://www.ideacellular.com/blocked\">details</a></body></html>";
    mb.notification.headers = {{"Content-Type", "text/html"}};
    mb.notification.fingerprint = "ideacellular.com/blocked";
    mb.drop_flow_after_trigger = true;
  } else if (name == "vodafone_im") {
    mb.kind = MiddleboxKind::IM;
    mb.covert = true;
    mb.matcher.host_selection = HostSelection::LastHost;
    mb.matcher.scan_trailing_bytes = true;
    mb.notification.flags = tcp::kRst | tcp::kAck;
    mb.drop_flow_after_trigger = true;
  } else {
    throw ConfigError("unknown archetype '" + std::string(name) + "'");
  }
  return mb;
}

json middlebox_to_json(const MiddleboxConfig& mb) {
  json j;
  j["id"] = mb.id;
  j["kind"] = to_string(mb.kind);
  j["attach"] = mb.attach;
  if (!mb.blocklist_ref.empty()) {
    j["blocklist"] = mb.blocklist_ref;
  } else {
    j["blocklist"] = json(std::vector<std::string>(mb.blocklist.begin(), mb.blocklist.end()));
  }
  j["matcher"] = matcher_to_json(mb.matcher);
  j["inspect"] = to_string(mb.inspect);
  j["stateful"] = mb.stateful;
  j["state_timeout_ticks"] = mb.state_timeout_ticks;
  json n;
  n["body_template"] = mb.notification.body_template;
  n["headers"] = headers_to_json(mb.notification.headers);
  n["flags"] = flags_to_json(mb.notification.flags);
  n["ip_id"] = mb.notification.ip_id.fixed ? json(*mb.notification.ip_id.fixed) : json("random");
  n["fingerprint"] = mb.notification.fingerprint;
  j["notification"] = n;
  j["send_rst_followup"] = mb.send_rst_followup;
  j["covert"] = mb.covert;
  j["drop_flow_after_trigger"] = mb.drop_flow_after_trigger;
  json delay = json::array();
  for (const auto& d : mb.injection_delay_ticks) delay.push_back(json::array({d.ticks, d.weight}));
  j["injection_delay_ticks"] = delay;
  j["reassemble"] = mb.reassemble;
  if (!mb.source_prefixes.empty()) {
    json sp = json::array();
    for (const auto& p : mb.source_prefixes) sp.push_back(p.str());
    j["source_prefixes"] = sp;
  }
  if (mb.dns_forge_answer) j["dns_forge_answer"] = mb.dns_forge_answer->str();
  return j;
}

MiddleboxConfig middlebox_from_json(const json& j, const std::string& ptr) {
  if (!j.is_object()) throw ConfigError("expected an object", ptr);
  MiddleboxConfig mb;
  if (auto it = j.find("archetype"); it != j.end()) {
    try {
      mb = archetype(as_string(*it, join_ptr(ptr, "archetype")));
    } catch (const ConfigError& e) {
      throw ConfigError(e.what(), join_ptr(ptr, "archetype"));
    }
  }
  mb.id = as_string(require(j, "id", ptr), join_ptr(ptr, "id"));
  mb.attach = as_string(require(j, "attach", ptr), join_ptr(ptr, "attach"));
  if (auto it = j.find("kind"); it != j.end()) {
    auto k = as_string(*it, join_ptr(ptr, "kind"));
    if (k == "IM") mb.kind = MiddleboxKind::IM;
    else if (k == "WM") mb.kind = MiddleboxKind::WM;
    else throw ConfigError("kind must be IM or WM", join_ptr(ptr, "kind"));
  }
  if (auto it = j.find("blocklist"); it != j.end()) {
    auto p = join_ptr(ptr, "blocklist");
    if (it->is_string()) {
      mb.blocklist_ref = it->get<std::string>();
    } else {
      each(*it, p, [&](const json& d, const std::string& dp) { mb.blocklist.insert(to_lower(as_string(d, dp))); });
    }
  }
  if (auto it = j.find("matcher"); it != j.end()) mb.matcher = matcher_from_json(*it, join_ptr(ptr, "matcher"));
  if (auto it = j.find("inspect"); it != j.end()) {
    try {
      mb.inspect = inspect_from_string(as_string(*it, join_ptr(ptr, "inspect")));
    } catch (const ConfigError& e) {
      throw ConfigError(e.what(), join_ptr(ptr, "inspect"));
    }
  }
  mb.stateful = opt_bool(j, "stateful", ptr, mb.stateful);
  if (auto it = j.find("state_timeout_ticks"); it != j.end())
    mb.state_timeout_ticks = as_int(*it, join_ptr(ptr, "state_timeout_ticks"), 1, 1'000'000'000);
  if (auto it = j.find("notification"); it != j.end()) {
    auto np = join_ptr(ptr, "notification");
    if (!it->is_object()) throw ConfigError("expected an object", np);
    auto& n = mb.notification;
    n.body_template = opt_string(*it, "body_template", np, n.body_template);
    if (auto h = it->find("headers"); h != it->end()) n.headers = headers_from_json(*h, join_ptr(np, "headers"));
    if (auto f = it->find("flags"); f != it->end()) n.flags = flags_from_json(*f, join_ptr(np, "flags"));
    if (auto id = it->find("ip_id"); id != it->end()) {
      if (id->is_string() && id->get<std::string>() == "random") n.ip_id.fixed.reset();
      else n.ip_id.fixed = static_cast<uint16_t>(as_int(*id, join_ptr(np, "ip_id"), 0, 65535));
    }
    n.fingerprint = opt_string(*it, "fingerprint", np, n.fingerprint);
  }
  mb.send_rst_followup = opt_bool(j, "send_rst_followup", ptr, mb.send_rst_followup);
  mb.covert = opt_bool(j, "covert", ptr, mb.covert);
  mb.drop_flow_after_trigger = opt_bool(j, "drop_flow_after_trigger", ptr, mb.drop_flow_after_trigger);
  mb.reassemble = opt_bool(j, "reassemble", ptr, mb.reassemble);
  if (auto it = j.find("injection_win_probability"); it != j.end()) {
    auto p = join_ptr(ptr, "injection_win_probability");
    if (!it->is_number()) throw ConfigError("expected a number", p);
    try {
      mb.injection_delay_ticks = delay_for_win_probability(it->get<double>());
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what(), p);
    }
  }
  if (auto it = j.find("injection_delay_ticks"); it != j.end()) {
    mb.injection_delay_ticks.clear();
    each(*it, join_ptr(ptr, "injection_delay_ticks"), [&](const json& d, const std::string& dp) {
      if (!d.is_array() || d.size() != 2 || !d[1].is_number()) throw ConfigError("expected [ticks, weight]", dp);
      mb.injection_delay_ticks.push_back({as_int(d[0], dp + "/0", 0, 1'000'000), d[1].get<double>()});
    });
  }
  if (auto it = j.find("source_prefixes"); it != j.end()) {
    mb.source_prefixes.clear();
    each(*it, join_ptr(ptr, "source_prefixes"), [&](const json& p, const std::string& pp) {
      mb.source_prefixes.push_back(as_prefix(p, pp));
    });
  }
  if (auto it = j.find("dns_forge_answer"); it != j.end()) mb.dns_forge_answer = as_addr(*it, join_ptr(ptr, "dns_forge_answer"));
  try {
    mb.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(e.what(), ptr);
  }
  return mb;
}

json topology_to_json(const TopologyConfig& cfg) {
  json j;
  j["name"] = cfg.name;
  j["server_latency_ticks"] = cfg.server_latency_ticks;
  json routers = json::array();
  for (const auto& r : cfg.routers) {
    json rj{{"id", r.id}, {"addr", r.addr.str()}, {"as", r.as_label}};
    if (r.anonymized) rj["anonymized"] = true;
    routers.push_back(rj);
  }
  j["routers"] = routers;
  json clients = json::array();
  for (const auto& c : cfg.clients) clients.push_back({{"id", c.id}, {"addr", c.addr.str()}, {"as", c.as_label}});
  j["clients"] = clients;
  json servers = json::array();
  for (const auto& s : cfg.web_servers) {
    json sj{{"id", s.id}, {"addr", s.addr.str()}, {"as", s.as_label}};
    if (s.ports != std::vector<uint16_t>{80}) sj["ports"] = s.ports;
    if (!s.up) sj["up"] = false;
    if (s.close_after_response) sj["close_after_response"] = true;
    json sites = json::array();
    for (const auto& site : s.sites) {
      if (!site.body && !site.edge_body && site.edge_headers.empty()) {
        sites.push_back(site.domain);
        continue;
      }
      json st{{"domain", site.domain}};
      if (site.body) st["body"] = *site.body;
      if (site.edge_body) st["edge_body"] = *site.edge_body;
      if (!site.edge_headers.empty()) st["edge_headers"] = headers_to_json(site.edge_headers);
      sites.push_back(st);
    }
    sj["sites"] = sites;
    servers.push_back(sj);
  }
  j["web_servers"] = servers;
  json resolvers = json::array();
  for (const auto& r : cfg.resolvers) {
    json rj{{"id", r.id}, {"addr", r.addr.str()}, {"as", r.as_label}};
    if (!r.honest_map.empty()) {
      json h = json::object();
      for (const auto& [d, ips] : r.honest_map) h[d] = addrs_to_json(ips);
      rj["honest"] = h;
    }
    if (!r.poisoned_map.empty()) {
      // Group by answer to keep large resolver farms compact.
      std::map<Ipv4Addr, std::vector<std::string>> by_answer;
      for (const auto& [d, ip] : r.poisoned_map) by_answer[ip].push_back(d);
      json p = json::array();
      for (const auto& [ip, domains] : by_answer) p.push_back({{"answer", ip.str()}, {"domains", domains}});
      rj["poisoned"] = p;
    }
    if (!r.use_authoritative) rj["use_authoritative"] = false;
    resolvers.push_back(rj);
  }
  j["resolvers"] = resolvers;
  json hosts = json::array();
  for (const auto& h : cfg.hosts) hosts.push_back({{"id", h.id}, {"addr", h.addr.str()}, {"as", h.as_label}});
  j["hosts"] = hosts;
  json links = json::array();
  for (const auto& [a, b] : cfg.links) links.push_back(json::array({a, b}));
  j["links"] = links;
  json bl = json::object();
  for (const auto& [name, list] : cfg.blocklists) bl[name] = std::vector<std::string>(list.begin(), list.end());
  j["blocklists"] = bl;
  json mbs = json::array();
  for (const auto& mb : cfg.middleboxes) mbs.push_back(middlebox_to_json(mb));
  j["middleboxes"] = mbs;
  json bh = json::array();
  for (const auto& b : cfg.blackholes) {
    json bj{{"router", b.router}, {"dst", b.dst.str()}};
    if (b.drop_first) bj["drop_first"] = *b.drop_first;
    bh.push_back(bj);
  }
  j["blackholes"] = bh;
  json dns = json::object();
  for (const auto& [d, ips] : cfg.authoritative_dns) dns[d] = addrs_to_json(ips);
  j["dns"] = dns;
  json asp = json::object();
  for (const auto& [as, prefixes] : cfg.as_prefixes) {
    json arr = json::array();
    for (const auto& p : prefixes) arr.push_back(p.str());
    asp[as] = arr;
  }
  j["as_prefixes"] = asp;
  return j;
}

TopologyConfig topology_from_json(const json& doc) {
  if (!doc.is_object()) throw ConfigError("topology document must be an object", "");
  TopologyConfig cfg;
  cfg.name = opt_string(doc, "name", "");
  if (auto it = doc.find("server_latency_ticks"); it != doc.end())
    cfg.server_latency_ticks = as_int(*it, "/server_latency_ticks", 0, 1'000'000);

  auto section = [&](const char* key, auto&& f) {
    if (auto it = doc.find(key); it != doc.end()) each(*it, std::string("/") + key, f);
  };
  auto id_addr_as = [](const json& e, const std::string& p, auto& out) {
    out.id = as_string(require(e, "id", p), p + "/id");
    out.addr = as_addr(require(e, "addr", p), p + "/addr");
    out.as_label = opt_string(e, "as", p);
  };

  section("routers", [&](const json& e, const std::string& p) {
    RouterConfig r;
    id_addr_as(e, p, r);
    r.anonymized = opt_bool(e, "anonymized", p, false);
    cfg.routers.push_back(std::move(r));
  });
  section("clients", [&](const json& e, const std::string& p) {
    ClientConfig c;
    id_addr_as(e, p, c);
    cfg.clients.push_back(std::move(c));
  });
  section("web_servers", [&](const json& e, const std::string& p) {
    WebServerConfig s;
    id_addr_as(e, p, s);
    if (auto it = e.find("ports"); it != e.end()) {
      s.ports.clear();
      each(*it, p + "/ports", [&](const json& v, const std::string& vp) {
        s.ports.push_back(static_cast<uint16_t>(as_int(v, vp, 1, 65535)));
      });
    }
    s.up = opt_bool(e, "up", p, true);
    s.close_after_response = opt_bool(e, "close_after_response", p, false);
    if (auto it = e.find("sites"); it != e.end()) {
      each(*it, p + "/sites", [&](const json& v, const std::string& vp) {
        SiteConfig site;
        if (v.is_string()) {
          site.domain = to_lower(v.get<std::string>());
        } else {
          site.domain = to_lower(as_string(require(v, "domain", vp), vp + "/domain"));
          if (auto b = v.find("body"); b != v.end()) site.body = as_string(*b, vp + "/body");
          if (auto b = v.find("edge_body"); b != v.end()) site.edge_body = as_string(*b, vp + "/edge_body");
          if (auto h = v.find("edge_headers"); h != v.end()) site.edge_headers = headers_from_json(*h, vp + "/edge_headers");
        }
        s.sites.push_back(std::move(site));
      });
    }
    cfg.web_servers.push_back(std::move(s));
  });
  section("resolvers", [&](const json& e, const std::string& p) {
    ResolverConfig r;
    id_addr_as(e, p, r);
    if (auto it = e.find("honest"); it != e.end()) {
      if (!it->is_object()) throw ConfigError("expected an object", p + "/honest");
      for (const auto& [d, ips] : it->items()) r.honest_map[to_lower(d)] = addrs_from_json(ips, p + "/honest/" + d);
    }
    if (auto it = e.find("poisoned"); it != e.end()) {
      each(*it, p + "/poisoned", [&](const json& g, const std::string& gp) {
        auto answer = as_addr(require(g, "answer", gp), gp + "/answer");
        each(require(g, "domains", gp), gp + "/domains", [&](const json& d, const std::string& dp) {
          r.poisoned_map[to_lower(as_string(d, dp))] = answer;
        });
      });
    }
    r.use_authoritative = opt_bool(e, "use_authoritative", p, true);
    cfg.resolvers.push_back(std::move(r));
  });
  section("hosts", [&](const json& e, const std::string& p) {
    HostConfig h;
    id_addr_as(e, p, h);
    cfg.hosts.push_back(std::move(h));
  });
  section("links", [&](const json& e, const std::string& p) {
    if (!e.is_array() || e.size() != 2) throw ConfigError("a link is a pair of node ids", p);
    cfg.links.emplace_back(as_string(e[0], p + "/0"), as_string(e[1], p + "/1"));
  });
  if (auto it = doc.find("blocklists"); it != doc.end()) {
    if (!it->is_object()) throw ConfigError("expected an object", "/blocklists");
    for (const auto& [name, list] : it->items()) {
      auto& dst = cfg.blocklists[name];
      each(list, "/blocklists/" + name, [&](const json& d, const std::string& dp) { dst.insert(to_lower(as_string(d, dp))); });
    }
  }
  section("middleboxes", [&](const json& e, const std::string& p) { cfg.middleboxes.push_back(middlebox_from_json(e, p)); });
  section("blackholes", [&](const json& e, const std::string& p) {
    BlackholeConfig b;
    b.router = as_string(require(e, "router", p), p + "/router");
    b.dst = as_addr(require(e, "dst", p), p + "/dst");
    if (auto it = e.find("drop_first"); it != e.end()) b.drop_first = static_cast<int>(as_int(*it, p + "/drop_first", 0, 1'000'000));
    cfg.blackholes.push_back(b);
  });
  if (auto it = doc.find("dns"); it != doc.end()) {
    if (!it->is_object()) throw ConfigError("expected an object", "/dns");
    for (const auto& [d, ips] : it->items()) cfg.authoritative_dns[to_lower(d)] = addrs_from_json(ips, "/dns/" + d);
  }
  if (auto it = doc.find("as_prefixes"); it != doc.end()) {
    if (!it->is_object()) throw ConfigError("expected an object", "/as_prefixes");
    for (const auto& [as, list] : it->items()) {
      auto& dst = cfg.as_prefixes[as];
      each(list, "/as_prefixes/" + as, [&](const json& v, const std::string& vp) { dst.push_back(as_prefix(v, vp)); });
    }
  }
  // Middlebox blocklist references are checked here so the pointer is precise.
  for (size_t i = 0; i < cfg.middleboxes.size(); ++i) {
    const auto& ref = cfg.middleboxes[i].blocklist_ref;
    if (!ref.empty() && !cfg.blocklists.count(ref))
      throw ConfigError("unknown blocklist '" + ref + "'", "/middleboxes/" + std::to_string(i) + "/blocklist");
  }
  return cfg;
}

}  // namespace netsim
}  // namespace censorlab
