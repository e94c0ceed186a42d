#include "censorlab/netsim.hpp"

#include <algorithm>
#include <deque>
#include <set>
#include <sstream>

#include "censorlab/json_io.hpp"

namespace censorlab::netsim {

namespace {

constexpr uint32_t kImRstSeqOffset = 1'000'000;

std::string list_names(const std::vector<std::string>& names, size_t limit = 12) {
  std::string out;
  for (size_t i = 0; i < names.size() && i < limit; ++i) {
    if (i) out += ", ";
    out += names[i];
  }
  if (names.size() > limit) out += ", ... (" + std::to_string(names.size()) + " total)";
  return out;
}

bool is_endpoint(NodeKind k) { return k != NodeKind::Router; }

}  // namespace

// ---------------------------------------------------------------------------
// Topology

std::optional<size_t> Topology::node_index(std::string_view id) const {
  auto it = by_id_.find(std::string(id));
  if (it == by_id_.end()) return std::nullopt;
  return it->second;
}

std::optional<size_t> Topology::node_by_addr(Ipv4Addr a) const {
  auto it = by_addr_.find(a);
  if (it == by_addr_.end()) return std::nullopt;
  return it->second;
}

const Node& Topology::node(std::string_view id) const {
  auto i = node_index(id);
  if (!i) throw std::invalid_argument("unknown node '" + std::string(id) + "'");
  return nodes_[*i];
}

const std::vector<size_t>& Topology::path(std::string_view client, Ipv4Addr dst) const {
  static const std::vector<size_t> kEmpty;
  auto ci = node_index(client);
  auto di = node_by_addr(dst);
  if (!ci || !di) return kEmpty;
  auto key = std::make_pair(*ci, *di);
  if (auto it = path_cache_.find(key); it != path_cache_.end()) return it->second;
  std::vector<size_t> p;
  auto pit = parents_.find(*ci);
  if (pit != parents_.end()) {
    const auto& parent = pit->second;
    if (*di == *ci) {
      p.push_back(*ci);
    } else if (parent[*di] >= 0 && is_endpoint(nodes_[*di].kind)) {
      for (int64_t cur = static_cast<int64_t>(*di); cur >= 0; cur = parent[cur]) {
        p.push_back(static_cast<size_t>(cur));
        if (static_cast<size_t>(cur) == *ci) break;
      }
      std::reverse(p.begin(), p.end());
    }
  }
  return path_cache_.emplace(key, std::move(p)).first->second;
}

int Topology::hop_count(std::string_view client, Ipv4Addr dst) const {
  const auto& p = path(client, dst);
  return p.size() < 2 ? 0 : static_cast<int>(p.size()) - 1;
}

std::vector<Hop> Topology::traceroute(std::string_view client, Ipv4Addr dst) const {
  const auto& p = path(client, dst);
  if (p.empty()) throw std::invalid_argument("no route from " + std::string(client) + " to " + dst.str());
  std::vector<Hop> hops;
  for (size_t i = 1; i < p.size(); ++i) {
    const auto& n = nodes_[p[i]];
    Hop h;
    h.index = static_cast<int>(i);
    if (!n.anonymized) {
      h.addr = n.addr;
      h.as_label = n.as_label;
    }
    hops.push_back(h);
  }
  return hops;
}

std::string Topology::as_of(Ipv4Addr a) const {
  for (const auto& [as, prefixes] : cfg_.as_prefixes)
    for (const auto& p : prefixes)
      if (p.contains(a)) return as;
  if (auto i = node_by_addr(a)) return nodes_[*i].as_label;
  return {};
}

std::vector<std::string> Topology::client_ids() const {
  std::vector<std::string> out;
  for (const auto& c : cfg_.clients) out.push_back(c.id);
  return out;
}

Topology build_topology(TopologyConfig cfg) {
  Topology t;
  std::vector<std::string> dup_ids, dup_addrs;
  auto add = [&](const std::string& id, Ipv4Addr addr, const std::string& as, NodeKind kind, bool anon, size_t idx) {
    if (t.by_id_.count(id)) {
      dup_ids.push_back(id);
      return;
    }
    if (t.by_addr_.count(addr)) {
      dup_addrs.push_back(addr.str() + " (" + t.nodes_[t.by_addr_[addr]].id + ", " + id + ")");
      return;
    }
    t.by_id_[id] = t.nodes_.size();
    t.by_addr_[addr] = t.nodes_.size();
    t.nodes_.push_back(Node{id, addr, as, kind, anon, idx});
  };
  for (size_t i = 0; i < cfg.routers.size(); ++i) {
    const auto& r = cfg.routers[i];
    add(r.id, r.addr, r.as_label, NodeKind::Router, r.anonymized, i);
  }
  for (size_t i = 0; i < cfg.clients.size(); ++i)
    add(cfg.clients[i].id, cfg.clients[i].addr, cfg.clients[i].as_label, NodeKind::Client, false, i);
  for (size_t i = 0; i < cfg.web_servers.size(); ++i)
    add(cfg.web_servers[i].id, cfg.web_servers[i].addr, cfg.web_servers[i].as_label, NodeKind::WebServer, false, i);
  for (size_t i = 0; i < cfg.resolvers.size(); ++i)
    add(cfg.resolvers[i].id, cfg.resolvers[i].addr, cfg.resolvers[i].as_label, NodeKind::Resolver, false, i);
  for (size_t i = 0; i < cfg.hosts.size(); ++i)
    add(cfg.hosts[i].id, cfg.hosts[i].addr, cfg.hosts[i].as_label, NodeKind::Host, false, i);
  if (!dup_ids.empty()) throw ConfigError("duplicate node ids: " + list_names(dup_ids));
  if (!dup_addrs.empty()) throw ConfigError("duplicate addresses: " + list_names(dup_addrs));
  if (cfg.clients.empty()) throw ConfigError("topology has no clients");

  t.adj_.assign(t.nodes_.size(), {});
  std::vector<std::string> bad_links;
  for (const auto& [a, b] : cfg.links) {
    auto ia = t.by_id_.find(a);
    auto ib = t.by_id_.find(b);
    if (ia == t.by_id_.end() || ib == t.by_id_.end() || a == b) {
      bad_links.push_back(a + "-" + b);
      continue;
    }
    t.adj_[ia->second].push_back(ib->second);
    t.adj_[ib->second].push_back(ia->second);
  }
  if (!bad_links.empty()) throw ConfigError("links with unknown or identical ends: " + list_names(bad_links));
  for (auto& nbrs : t.adj_) {
    std::sort(nbrs.begin(), nbrs.end(), [&](size_t x, size_t y) { return t.nodes_[x].id < t.nodes_[y].id; });
    nbrs.erase(std::unique(nbrs.begin(), nbrs.end()), nbrs.end());
  }

  for (auto& [name, list] : cfg.blocklists) {
    std::set<std::string> lowered;
    for (const auto& d : list) lowered.insert(to_lower(d));
    list = std::move(lowered);
  }
  for (auto& mb : cfg.middleboxes) {
    if (!mb.blocklist_ref.empty()) {
      auto it = cfg.blocklists.find(mb.blocklist_ref);
      if (it == cfg.blocklists.end())
        throw ConfigError("middlebox '" + mb.id + "' references unknown blocklist '" + mb.blocklist_ref + "'");
      mb.blocklist.insert(it->second.begin(), it->second.end());
    }
    auto at = t.by_id_.find(mb.attach);
    if (at == t.by_id_.end() || t.nodes_[at->second].kind != NodeKind::Router)
      throw ConfigError("middlebox '" + mb.id + "' attaches to '" + mb.attach + "', which is not a router");
    mb.validate();
  }
  for (const auto& b : cfg.blackholes) {
    auto at = t.by_id_.find(b.router);
    if (at == t.by_id_.end() || t.nodes_[at->second].kind != NodeKind::Router)
      throw ConfigError("blackhole references '" + b.router + "', which is not a router");
  }

  // Breadth-first search from every client, transiting routers only.
  std::vector<std::string> unreachable;
  std::vector<bool> router_used(t.nodes_.size(), false);
  for (size_t ci = 0; ci < t.nodes_.size(); ++ci) {
    if (t.nodes_[ci].kind != NodeKind::Client) continue;
    std::vector<int64_t> parent(t.nodes_.size(), -1);
    std::vector<bool> seen(t.nodes_.size(), false);
    std::deque<size_t> q{ci};
    seen[ci] = true;
    while (!q.empty()) {
      auto u = q.front();
      q.pop_front();
      if (u != ci && t.nodes_[u].kind != NodeKind::Router) continue;
      for (auto v : t.adj_[u]) {
        if (seen[v]) continue;
        seen[v] = true;
        parent[v] = static_cast<int64_t>(u);
        q.push_back(v);
      }
    }
    for (size_t n = 0; n < t.nodes_.size(); ++n) {
      auto kind = t.nodes_[n].kind;
      if (kind == NodeKind::Router || kind == NodeKind::Client) continue;
      if (!seen[n]) {
        unreachable.push_back(t.nodes_[ci].id + "->" + t.nodes_[n].id);
        continue;
      }
      for (auto cur = parent[n]; cur >= 0 && static_cast<size_t>(cur) != ci; cur = parent[cur]) router_used[cur] = true;
    }
    t.parents_[ci] = std::move(parent);
  }
  if (!unreachable.empty()) throw ConfigError("disconnected topology, unreachable: " + list_names(unreachable));
  std::vector<std::string> stray;
  for (size_t n = 0; n < t.nodes_.size(); ++n)
    if (t.nodes_[n].kind == NodeKind::Router && !router_used[n]) stray.push_back(t.nodes_[n].id);
  if (!stray.empty()) throw ConfigError("routers on no client path: " + list_names(stray));

  t.cfg_ = std::move(cfg);
  return t;
}

// ---------------------------------------------------------------------------
// Misc helpers

uint64_t SimRng::below(uint64_t n) {
  if (n == 0) throw std::invalid_argument("SimRng::below(0)");
  uint64_t limit = ~uint64_t{0} - (~uint64_t{0} % n);
  uint64_t x;
  do {
    x = gen_();
  } while (x >= limit);
  return x % n;
}

std::string to_string(EventKind k) {
  switch (k) {
    case EventKind::Delivered: return "delivered";
    case EventKind::Filtered: return "filtered";
    case EventKind::Dropped: return "dropped";
    case EventKind::ServerReceived: return "server-received";
    case EventKind::Timeout: return "timeout";
  }
  return "?";
}

std::string to_string(Origin o) {
  switch (o) {
    case Origin::None: return "none";
    case Origin::Client: return "client";
    case Origin::Router: return "router";
    case Origin::WebServer: return "web-server";
    case Origin::Resolver: return "resolver";
    case Origin::Middlebox: return "middlebox";
  }
  return "?";
}

bool DropRule::matches(const Packet& p) const {
  if (flags_any) {
    auto* t = p.tcp();
    if (!t || !t->any(flags_any)) return false;
  }
  if (ip_id && p.ip_id != *ip_id) return false;
  if (src && p.src != *src) return false;
  return true;
}

std::string default_site_body(std::string_view domain) {
  std::string d(domain);
  return "<html><head><title>Welcome to " + d + "</title></head><body><h1>" + d +
         "</h1><p>Latest stories, pictures and updates from " + d + ".</p></body></html>";
}

HeaderList genuine_headers() { return {{"Server", "nginx"}, {"Content-Type", "text/html"}}; }

std::optional<std::string> response_body(const Packet& p) {
  auto* t = p.tcp();
  if (!t || t->data.empty()) return std::nullopt;
  auto rs = parse_http_responses(t->data);
  if (rs.empty()) return std::nullopt;
  return rs.front().body;
}

bool looks_like_censor_reply(const Packet& p, const std::optional<std::string>& reference) {
  auto* t = p.tcp();
  if (!t) return false;
  if (t->has(tcp::kRst)) return true;
  if (!t->data.empty() && t->has(tcp::kFin)) return true;
  if (reference && !t->data.empty()) {
    auto body = response_body(p);
    if (body && *body != *reference) return true;
  }
  return false;
}

// ---------------------------------------------------------------------------
// Network

Network::Network(Topology topo, uint64_t seed) : topo_(std::move(topo)), rng_(seed) {
  const auto& cfg = topo_.config();
  for (const auto& mb : cfg.middleboxes) {
    MiddleboxRt rt;
    rt.cfg = mb;
    rt.router = *topo_.node_index(mb.attach);
    mb_at_router_[rt.router].push_back(middleboxes_.size());
    middleboxes_.push_back(std::move(rt));
  }
  for (size_t i = 0; i < topo_.nodes().size(); ++i) {
    if (topo_.node(i).kind == NodeKind::WebServer) servers_[i].next_ip_id = rng_.u16();
    if (topo_.node(i).kind == NodeKind::Client) next_port_[i] = static_cast<uint16_t>(40000 + rng_.below(10000));
  }
}

void Network::record(EventKind k, Origin o, size_t node, std::string note, const Packet& p) {
  if (!recording_) return;
  trace_.push_back(Event{clock_, k, o, topo_.node(node).id, std::move(note), p});
}

void Network::schedule(int64_t tick, Pending::Action a, size_t node, Origin origin, Packet p) {
  queue_.push(Pending{tick, seq_++, a, node, origin, std::move(p)});
}

std::vector<Event> Network::send(std::string_view client, Packet p) {
  auto ci = topo_.node_index(client);
  if (!ci || topo_.node(*ci).kind != NodeKind::Client)
    throw std::invalid_argument("'" + std::string(client) + "' is not a client");
  if (p.src == Ipv4Addr{}) p.src = topo_.node(*ci).addr;
  collecting_for_ = *ci;
  collected_.clear();
  int64_t t0 = clock_;
  schedule(clock_, Pending::Action::Launch, *ci, Origin::Client, std::move(p));
  drain(0, false);
  clock_ = std::max(clock_, t0 + 1);
  collecting_for_.reset();
  auto out = std::move(collected_);
  collected_.clear();
  if (out.empty()) {
    Event e;
    e.tick = clock_;
    e.kind = EventKind::Timeout;
    e.node = std::string(client);
    e.note = "no reply";
    out.push_back(e);
  }
  return out;
}

void Network::advance(int64_t ticks) {
  if (ticks < 0) throw std::invalid_argument("cannot move the clock backwards");
  drain(clock_ + ticks, true);
}

void Network::drain(int64_t until, bool bounded) {
  while (!queue_.empty() && (!bounded || queue_.top().tick <= until)) {
    auto item = queue_.top();
    queue_.pop();
    clock_ = std::max(clock_, item.tick);
    if (item.action == Pending::Action::Launch) launch(item.from, item.origin, std::move(item.packet));
    else arrive(item.from, item.origin, item.packet);
  }
  if (bounded) clock_ = std::max(clock_, until);
}

void Network::set_client_filter(std::string_view client, std::vector<DropRule> rules) {
  auto ci = topo_.node_index(client);
  if (!ci) throw std::invalid_argument("unknown client '" + std::string(client) + "'");
  filters_[*ci] = std::move(rules);
}

uint16_t Network::ephemeral_port(std::string_view client) {
  auto ci = topo_.node_index(client);
  if (!ci) throw std::invalid_argument("unknown client '" + std::string(client) + "'");
  auto& p = next_port_[*ci];
  uint16_t out = p;
  p = p >= 60999 ? 32768 : static_cast<uint16_t>(p + 1);
  return out;
}

std::vector<Ipv4Addr> Network::clean_resolve(std::string_view domain) const {
  const auto& dns = topo_.config().authoritative_dns;
  auto it = dns.find(to_lower(domain));
  return it == dns.end() ? std::vector<Ipv4Addr>{} : it->second;
}

std::optional<std::string> Network::clean_fetch(std::string_view domain, Ipv4Addr server) const {
  auto ni = topo_.node_by_addr(server);
  if (!ni || topo_.node(*ni).kind != NodeKind::WebServer) return std::nullopt;
  const auto& s = topo_.config().web_servers[topo_.node(*ni).config_index];
  if (!s.up) return std::nullopt;
  auto d = to_lower(domain);
  for (const auto& site : s.sites)
    if (site.domain == d) return site.body ? *site.body : default_site_body(d);
  return std::nullopt;
}

bool Network::clean_handshake(Ipv4Addr server, uint16_t port) const {
  auto ni = topo_.node_by_addr(server);
  if (!ni || topo_.node(*ni).kind != NodeKind::WebServer) return false;
  const auto& s = topo_.config().web_servers[topo_.node(*ni).config_index];
  return s.up && std::find(s.ports.begin(), s.ports.end(), port) != s.ports.end();
}

const std::vector<Receipt>& Network::receipt_log(Ipv4Addr server) const {
  static const std::vector<Receipt> kEmpty;
  auto ni = topo_.node_by_addr(server);
  if (!ni) return kEmpty;
  auto it = receipts_.find(*ni);
  return it == receipts_.end() ? kEmpty : it->second;
}

std::string Network::trace_jsonl() const {
  std::string out;
  for (const auto& e : trace_) {
    json j;
    j["tick"] = e.tick;
    j["event"] = to_string(e.kind);
    j["origin"] = to_string(e.origin);
    j["node"] = e.node;
    if (!e.note.empty()) j["note"] = e.note;
    if (e.kind != EventKind::Timeout) j["packet"] = packet_to_json(e.packet);
    out += j.dump();
    out += '\n';
  }
  return out;
}

int64_t Network::draw_delay(const MiddleboxConfig& cfg) {
  const auto& d = cfg.injection_delay_ticks;
  if (d.size() == 1) return d.front().ticks;
  double total = 0;
  for (const auto& o : d) total += o.weight;
  double r = rng_.unit() * total;
  for (const auto& o : d) {
    if (r < o.weight) return o.ticks;
    r -= o.weight;
  }
  return d.back().ticks;
}

void Network::inject_to(size_t node, Origin origin, Packet p, int64_t delay) {
  schedule(clock_ + delay, Pending::Action::Arrive, node, origin, std::move(p));
}

void Network::launch(size_t from, Origin origin, Packet p) {
  // Resolve the router walk. Replies from endpoints follow the client's path in reverse.
  std::vector<size_t> path;
  bool from_client = topo_.node(from).kind == NodeKind::Client;
  auto dst = topo_.node_by_addr(p.dst);
  if (dst) {
    if (from_client) {
      path = topo_.path(topo_.node(from).id, p.dst);
    } else if (topo_.node(*dst).kind == NodeKind::Client) {
      path = topo_.path(topo_.node(*dst).id, topo_.node(from).addr);
      std::reverse(path.begin(), path.end());
    }
  }
  if (path.size() < 2) {
    record(EventKind::Dropped, origin, from, "unroutable", p);
    return;
  }
  if (p.ttl == 0) {
    record(EventKind::Dropped, origin, from, "ttl 0 not forwarded", p);
    return;
  }
  const auto& blackholes = topo_.config().blackholes;
  for (size_t i = 1; i + 1 < path.size(); ++i) {
    size_t r = path[i];
    const auto& router = topo_.node(r);
    for (size_t b = 0; b < blackholes.size(); ++b) {
      const auto& bh = blackholes[b];
      if (bh.router != router.id || bh.dst != p.dst) continue;
      if (bh.drop_first && blackhole_hits_[b] >= *bh.drop_first) continue;
      ++blackhole_hits_[b];
      record(EventKind::Dropped, origin, r, "blackhole", p);
      return;
    }
    // Taps see the packet as it reaches the attach router.
    if (auto it = mb_at_router_.find(r); it != mb_at_router_.end()) {
      size_t hop = from_client ? i : path.size() - 1 - i;
      for (auto mi : it->second) {
        if (tap(middleboxes_[mi], hop, p, from_client) == Verdict::Drop) {
          record(EventKind::Dropped, origin, r, "middlebox " + middleboxes_[mi].cfg.id, p);
          return;
        }
      }
    }
    p.ttl = static_cast<uint8_t>(p.ttl - 1);
    if (p.ttl == 0) {
      if (router.anonymized || !from_client) {
        record(EventKind::Dropped, origin, r, "ttl expired", p);
        return;
      }
      Packet icmp;
      icmp.src = router.addr;
      icmp.dst = p.src;
      icmp.ttl = static_cast<uint8_t>(64 - i + 1);
      icmp.ip_id = rng_.u16();
      IcmpMessage m;
      m.orig_dst = p.dst;
      m.orig_ip_id = p.ip_id;
      if (auto* t = p.tcp()) {
        m.orig_sport = t->sport;
        m.orig_dport = t->dport;
      }
      icmp.payload = m;
      record(EventKind::Dropped, origin, r, "ttl expired", p);
      inject_to(path.front(), Origin::Router, std::move(icmp), 0);
      return;
    }
  }
  schedule(clock_, Pending::Action::Arrive, path.back(), origin, std::move(p));
}

void Network::arrive(size_t at, Origin origin, const Packet& p) {
  const auto& n = topo_.node(at);
  switch (n.kind) {
    case NodeKind::Client: {
      for (const auto& rule : filters_[at]) {
        if (rule.matches(p)) {
          record(EventKind::Filtered, origin, at, "client filter", p);
          if (collecting_for_ == at)
            collected_.push_back(Event{clock_, EventKind::Filtered, origin, n.id, "client filter", p});
          return;
        }
      }
      record(EventKind::Delivered, origin, at, {}, p);
      if (collecting_for_ == at) collected_.push_back(Event{clock_, EventKind::Delivered, origin, n.id, {}, p});
      return;
    }
    case NodeKind::WebServer:
      record(EventKind::ServerReceived, origin, at, {}, p);
      receipts_[at].push_back(Receipt{clock_, p});
      on_web_server(at, p);
      return;
    case NodeKind::Resolver:
      record(EventKind::ServerReceived, origin, at, {}, p);
      on_resolver(at, p);
      return;
    case NodeKind::Host:
    case NodeKind::Router:
      record(EventKind::Dropped, origin, at, "no service", p);
      return;
  }
}

void Network::on_resolver(size_t node, const Packet& p) {
  auto* q = p.dns();
  if (!q || q->kind != DnsKind::Query) return;
  const auto& r = topo_.config().resolvers[topo_.node(node).config_index];
  auto name = to_lower(q->qname);
  DnsMessage resp;
  resp.kind = DnsKind::Response;
  resp.txid = q->txid;
  resp.qname = q->qname;
  if (auto it = r.poisoned_map.find(name); it != r.poisoned_map.end()) {
    resp.answers = {it->second};
  } else if (auto h = r.honest_map.find(name); h != r.honest_map.end()) {
    resp.answers = h->second;
  } else if (r.use_authoritative) {
    resp.answers = clean_resolve(name);
  }
  Packet out;
  out.src = topo_.node(node).addr;
  out.dst = p.src;
  out.ip_id = rng_.u16();
  out.payload = std::move(resp);
  schedule(clock_ + topo_.config().server_latency_ticks, Pending::Action::Launch, node, Origin::Resolver,
           std::move(out));
}

void Network::on_web_server(size_t node, const Packet& p) {
  auto* t = p.tcp();
  if (!t) return;
  const auto& cfg = topo_.config().web_servers[topo_.node(node).config_index];
  if (!cfg.up) return;
  auto& srv = servers_[node];
  int64_t when = clock_ + topo_.config().server_latency_ticks;
  auto reply = [&](uint8_t flags, uint32_t seq, uint32_t ack, std::string data) {
    Packet out;
    out.src = topo_.node(node).addr;
    out.dst = p.src;
    out.ip_id = srv.next_ip_id++;
    out.payload = TcpSegment{t->dport, t->sport, seq, ack, flags, std::move(data)};
    schedule(when, Pending::Action::Launch, node, Origin::WebServer, std::move(out));
  };
  bool port_open = std::find(cfg.ports.begin(), cfg.ports.end(), t->dport) != cfg.ports.end();
  if (!port_open) {
    if (!t->has(tcp::kRst)) reply(tcp::kRst | tcp::kAck, 0, t->seq + t->seq_len(), {});
    return;
  }
  auto key = std::make_tuple(p.src.value, t->sport, t->dport);
  if (t->has(tcp::kSyn) && !t->has(tcp::kAck)) {
    ServerConn c;
    uint32_t isn = rng_.u32();
    c.snd_nxt = isn + 1;
    c.rcv_nxt = t->seq + 1;
    srv.conns[key] = c;
    reply(tcp::kSyn | tcp::kAck, isn, c.rcv_nxt, {});
    return;
  }
  auto it = srv.conns.find(key);
  if (t->has(tcp::kRst)) {
    if (it != srv.conns.end()) srv.conns.erase(it);
    return;
  }
  if (it == srv.conns.end()) {
    reply(tcp::kRst, t->ack, 0, {});
    return;
  }
  auto& c = it->second;
  if (t->has(tcp::kAck) && t->ack == c.snd_nxt) c.established = true;
  if (!c.established) return;
  if (!t->data.empty() && t->seq == c.rcv_nxt) {
    c.buffer += t->data;
    c.rcv_nxt += static_cast<uint32_t>(t->data.size());
  }
  size_t consumed = 0;
  auto blocks = split_request_blocks(c.buffer, false, &consumed);
  for (auto block : blocks) {
    HttpResponse resp;
    resp.header_fields = genuine_headers();
    std::vector<ServerParsedRequest> parsed;
    try {
      parsed = parse_http_server(block);
    } catch (const HttpParseError&) {
    }
    if (parsed.empty() || !parsed.front().well_formed) {
      resp.status = 400;
      resp.body = "<html><body><h1>400 Bad Request</h1></body></html>";
    } else {
      const SiteConfig* site = nullptr;
      for (const auto& s : cfg.sites)
        if (s.domain == parsed.front().host) site = &s;
      if (!site) {
        resp.status = 404;
        resp.body = "<html><body><h1>404 Not Found</h1></body></html>";
      } else {
        resp.status = 200;
        resp.body = site->edge_body ? *site->edge_body : site->body ? *site->body : default_site_body(site->domain);
        for (const auto& h : site->edge_headers) resp.header_fields.push_back(h);
      }
    }
    auto data = render_response(resp);
    uint32_t seq = c.snd_nxt;
    c.snd_nxt += static_cast<uint32_t>(data.size());
    reply(tcp::kPsh | tcp::kAck, seq, c.rcv_nxt, std::move(data));
  }
  c.buffer.erase(0, consumed);
  bool fin = t->has(tcp::kFin) && t->seq + t->data.size() == c.rcv_nxt;
  if (fin) c.rcv_nxt += 1;
  if ((!blocks.empty() && cfg.close_after_response) || fin) {
    reply(tcp::kFin | tcp::kAck, c.snd_nxt, c.rcv_nxt, {});
    srv.conns.erase(it);
  }
}

Network::Verdict Network::tap(MiddleboxRt& mb, size_t hop, const Packet& p, bool client_to_server) {
  const auto& cfg = mb.cfg;
  Ipv4Addr client_addr = client_to_server ? p.src : p.dst;
  if (!cfg.source_prefixes.empty() &&
      std::none_of(cfg.source_prefixes.begin(), cfg.source_prefixes.end(),
                   [&](const Prefix& pr) { return pr.contains(client_addr); }))
    return Verdict::Pass;
  auto client_node = topo_.node_by_addr(client_addr);
  if (!client_node) return Verdict::Pass;
  uint8_t inj_ttl = static_cast<uint8_t>(64 - std::min<size_t>(hop, 63));

  if (auto* q = p.dns()) {
    if (cfg.dns_forge_answer && client_to_server && q->kind == DnsKind::Query && cfg.blocklist.count(to_lower(q->qname))) {
      ++triggers_[cfg.id];
      Packet forged;
      forged.src = p.dst;
      forged.dst = p.src;
      forged.ttl = inj_ttl;
      forged.ip_id = rng_.u16();
      forged.payload = DnsMessage{DnsKind::Response, q->txid, q->qname, {*cfg.dns_forge_answer}};
      inject_to(*client_node, Origin::Middlebox, std::move(forged), draw_delay(cfg));
    }
    return Verdict::Pass;
  }
  auto* t = p.tcp();
  if (!t) return Verdict::Pass;
  if (cfg.matcher.ports == PortScope::Port80Only && t->sport != 80 && t->dport != 80) return Verdict::Pass;

  auto a = std::make_pair(p.src.value, t->sport);
  auto b = std::make_pair(p.dst.value, t->dport);
  if (b < a) std::swap(a, b);
  auto key = std::make_tuple(a.first, a.second, b.first, b.second);
  auto it = mb.flows.find(key);
  if (it != mb.flows.end() && clock_ - it->second.last_activity > cfg.state_timeout_ticks) {
    mb.flows.erase(it);
    it = mb.flows.end();
  }
  bool from_initiator = it != mb.flows.end() && p.src == it->second.initiator && t->sport == it->second.initiator_port;
  if (t->has(tcp::kSyn) && !t->has(tcp::kAck)) {
    Flow f;
    f.initiator = p.src;
    f.initiator_port = t->sport;
    f.saw_syn = true;
    it = mb.flows.insert_or_assign(key, f).first;
  } else if (it != mb.flows.end()) {
    auto& f = it->second;
    if (t->flags == (tcp::kSyn | tcp::kAck) && !from_initiator && f.saw_syn) f.saw_synack = true;
    if (t->flags == tcp::kAck && t->data.empty() && from_initiator && f.saw_synack) f.handshake_complete = true;
  }
  Flow* flow = it == mb.flows.end() ? nullptr : &it->second;
  if (flow) flow->last_activity = clock_;

  // Inspection.
  std::optional<std::string> hit;
  bool inspect_dir = client_to_server ? cfg.inspect != InspectDirection::ResponseOnly
                                      : cfg.inspect != InspectDirection::RequestOnly;
  bool allowed = !cfg.stateful || (flow && flow->handshake_complete);
  if (!t->data.empty() && inspect_dir && allowed) {
    if (client_to_server) {
      std::optional<std::string> domain;
      if (cfg.reassemble) {
        if (!flow) {
          Flow f;
          f.initiator = p.src;
          f.initiator_port = t->sport;
          f.last_activity = clock_;
          flow = &mb.flows.insert_or_assign(key, f).first->second;
        }
        flow->stream += t->data;
        domain = parse_http_censor(flow->stream, cfg.matcher);
      } else {
        domain = parse_http_censor(t->data, cfg.matcher);
      }
      if (domain && cfg.blocklist.count(to_lower(*domain))) hit = to_lower(*domain);
    } else {
      for (const auto& d : cfg.blocklist) {
        if (t->data.find(d) != std::string::npos) {
          hit = d;
          break;
        }
      }
    }
  }

  bool im = cfg.kind == MiddleboxKind::IM;
  if (im && flow && flow->triggered && client_to_server && !hit) return Verdict::Drop;

  if (hit) {
    ++triggers_[cfg.id];
    // Forged packets come from the server side of the flow.
    Packet note;
    note.src = client_to_server ? p.dst : p.src;
    note.dst = client_addr;
    note.ttl = inj_ttl;
    TcpSegment seg;
    seg.sport = client_to_server ? t->dport : t->sport;
    seg.dport = client_to_server ? t->sport : t->dport;
    seg.seq = client_to_server ? t->ack : t->seq;
    seg.ack = client_to_server ? t->seq + static_cast<uint32_t>(t->data.size()) : t->ack;
    seg.flags = cfg.notification.flags;
    if (!cfg.notification.body_template.empty()) {
      HttpResponse r;
      r.header_fields = cfg.notification.headers;
      r.body = cfg.notification.body_template;
      for (size_t pos; (pos = r.body.find("{domain}")) != std::string::npos;) r.body.replace(pos, 8, *hit);
      seg.data = render_response(r);
    }
    auto ip_id = [&] { return cfg.notification.ip_id.fixed ? *cfg.notification.ip_id.fixed : rng_.u16(); };
    note.ip_id = ip_id();
    uint32_t rst_seq = seg.seq + seg.seq_len();
    note.payload = seg;
    int64_t delay = draw_delay(cfg);
    inject_to(*client_node, Origin::Middlebox, note, delay);
    if (cfg.send_rst_followup && !seg.has(tcp::kRst)) {
      Packet rst = note;
      rst.ip_id = ip_id();
      rst.payload = TcpSegment{seg.sport, seg.dport, rst_seq, seg.ack, static_cast<uint8_t>(tcp::kRst | tcp::kAck), {}};
      inject_to(*client_node, Origin::Middlebox, std::move(rst), delay);
    }
    if (!im) {
      if (flow) flow->triggered = true;
    } else {
      if (!flow) {
        Flow f;
        f.initiator = client_addr;
        f.initiator_port = client_to_server ? t->sport : t->dport;
        f.last_activity = clock_;
        flow = &mb.flows.insert_or_assign(key, f).first->second;
      }
      if (!flow->triggered) {
        flow->triggered = true;
        auto server_node = topo_.node_by_addr(client_to_server ? p.dst : p.src);
        if (server_node) {
          Packet to_server;
          to_server.src = client_addr;
          to_server.dst = topo_.node(*server_node).addr;
          to_server.ttl = inj_ttl;
          to_server.ip_id = ip_id();
          uint32_t client_seq = client_to_server ? t->seq : t->ack;
          to_server.payload = TcpSegment{seg.dport, seg.sport, client_seq + kImRstSeqOffset, 0, tcp::kRst, {}};
          inject_to(*server_node, Origin::Middlebox, std::move(to_server), 0);
        }
      }
      return Verdict::Drop;
    }
  }
  if (flow && t->any(tcp::kFin | tcp::kRst) && !(im && flow->triggered)) mb.flows.erase(key);
  return Verdict::Pass;
}

// ---------------------------------------------------------------------------
// TcpClient

TcpClient::TcpClient(Network& net, std::string client, Ipv4Addr dst, uint16_t dport)
    : net_(net), client_(std::move(client)), dst_(dst), sport_(net.ephemeral_port(client_)), dport_(dport) {
  snd_nxt_ = net_.rng().u32();
}

bool TcpClient::connect(int ttl) {
  send_segment(tcp::kSyn, {}, ttl);
  if (!established_) return false;
  send_segment(tcp::kAck, {}, ttl);
  return true;
}

std::vector<Event> TcpClient::send_segment(uint8_t flags, std::string data, int ttl, std::optional<uint32_t> seq) {
  TcpSegment seg;
  seg.sport = sport_;
  seg.dport = dport_;
  seg.seq = seq.value_or(snd_nxt_);
  seg.ack = (flags & tcp::kAck) ? rcv_nxt_ : 0;
  seg.flags = flags;
  seg.data = std::move(data);
  if (!seq) snd_nxt_ += seg.seq_len();
  Packet p;
  p.dst = dst_;
  p.ttl = static_cast<uint8_t>(std::clamp(ttl, 0, 255));
  p.ip_id = net_.rng().u16();
  p.payload = std::move(seg);
  auto events = net_.send(client_, std::move(p));
  absorb(events);
  return events;
}

std::vector<Event> TcpClient::send_request(const std::vector<std::string>& fragments, int ttl) {
  std::vector<Event> all;
  for (const auto& f : fragments) {
    auto ev = send_segment(tcp::kPsh | tcp::kAck, f, ttl);
    all.insert(all.end(), ev.begin(), ev.end());
  }
  return all;
}

void TcpClient::absorb(const std::vector<Event>& events) {
  for (const auto& e : events) {
    if (e.kind != EventKind::Delivered) continue;
    auto* t = e.packet.tcp();
    if (!t || e.packet.src != dst_ || t->sport != dport_ || t->dport != sport_) continue;
    inbound_.push_back(e.packet);
    if (t->has(tcp::kSyn | tcp::kAck)) {
      if (!established_) {
        rcv_nxt_ = t->seq + 1;
        established_ = true;
      }
      continue;
    }
    if (t->has(tcp::kRst)) {
      if (!established_ || t->seq == rcv_nxt_) reset_ = true;
      continue;
    }
    if (peer_closed_ || reset_ || t->seq != rcv_nxt_) continue;
    stream_ += t->data;
    rcv_nxt_ += static_cast<uint32_t>(t->data.size());
    if (t->has(tcp::kFin)) {
      rcv_nxt_ += 1;
      peer_closed_ = true;
    }
  }
}

}  // namespace censorlab::netsim
