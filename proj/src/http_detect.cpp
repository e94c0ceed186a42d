#include "censorlab/http_detect.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "censorlab/digest.hpp"

namespace censorlab::http_detect {

using netsim::EventKind;

// ---------------------------------------------------------------------------
// content_diff

namespace {

struct Match {
  size_t a, b, size;
};

class Matcher {
 public:
  Matcher(std::string_view a, std::string_view b) : a_(a), b_(b), j2len_(b.size() + 1, 0), newj2len_(b.size() + 1, 0) {
    for (size_t j = 0; j < b_.size(); ++j) b2j_[static_cast<unsigned char>(b_[j])].push_back(j);
  }

  Match longest(size_t alo, size_t ahi, size_t blo, size_t bhi) {
    size_t besti = alo, bestj = blo, bestsize = 0;
    std::vector<size_t> touched, new_touched;
    for (size_t i = alo; i < ahi; ++i) {
      new_touched.clear();
      for (auto j : b2j_[static_cast<unsigned char>(a_[i])]) {
        if (j < blo) continue;
        if (j >= bhi) break;
        size_t k = (j > 0 ? j2len_[j] : 0) + 1;  // j2len_[j] holds the run ending at j-1
        newj2len_[j + 1] = k;
        new_touched.push_back(j + 1);
        if (k > bestsize) {
          besti = i + 1 - k;
          bestj = j + 1 - k;
          bestsize = k;
        }
      }
      for (auto t : touched) j2len_[t] = 0;
      for (auto t : new_touched) j2len_[t] = newj2len_[t];
      for (auto t : new_touched) newj2len_[t] = 0;
      touched.swap(new_touched);
    }
    for (auto t : touched) j2len_[t] = 0;
    while (besti > alo && bestj > blo && a_[besti - 1] == b_[bestj - 1]) {
      --besti;
      --bestj;
      ++bestsize;
    }
    while (besti + bestsize < ahi && bestj + bestsize < bhi && a_[besti + bestsize] == b_[bestj + bestsize]) ++bestsize;
    return {besti, bestj, bestsize};
  }

  size_t matched() {
    std::vector<std::array<size_t, 4>> queue{{0, a_.size(), 0, b_.size()}};
    size_t total = 0;
    while (!queue.empty()) {
      auto [alo, ahi, blo, bhi] = queue.back();
      queue.pop_back();
      auto m = longest(alo, ahi, blo, bhi);
      if (m.size == 0) continue;
      total += m.size;
      if (alo < m.a && blo < m.b) queue.push_back({alo, m.a, blo, m.b});
      if (m.a + m.size < ahi && m.b + m.size < bhi) queue.push_back({m.a + m.size, ahi, m.b + m.size, bhi});
    }
    return total;
  }

 private:
  std::string_view a_, b_;
  std::array<std::vector<size_t>, 256> b2j_;
  // Indexed by j+1 so that "run ending at j-1" is j2len_[j].
  std::vector<size_t> j2len_, newj2len_;
};

}  // namespace

double content_diff(std::string_view a, std::string_view b) {
  if (a.empty() && b.empty()) return 0.0;
  // The block search is order dependent; taking the better of both
  // directions keeps the measure symmetric.
  auto m = std::max(Matcher(a, b).matched(), Matcher(b, a).matched());
  return 1.0 - 2.0 * static_cast<double>(m) / static_cast<double>(a.size() + b.size());
}

// ---------------------------------------------------------------------------
// Verdicts

std::string to_string(DiffStatus s) {
  switch (s) {
    case DiffStatus::Unblocked: return "Unblocked";
    case DiffStatus::NeedsReview: return "NeedsReview";
    case DiffStatus::ConfirmedBlocked: return "ConfirmedBlocked";
  }
  return "?";
}

std::optional<std::string> extract_fingerprint(std::string_view body) {
  if (auto e = netsim::match_fingerprint(body)) return e->fingerprint;
  return std::nullopt;
}

DiffVerdict classify_http(const std::string& domain, const std::string& direct_body, const std::string& clean_body,
                          double threshold) {
  DiffVerdict v;
  v.domain = domain;
  v.difference = content_diff(direct_body, clean_body);
  v.direct_digest = sha256_hex(direct_body);
  v.clean_digest = sha256_hex(clean_body);
  if (v.difference <= threshold) {
    v.status = DiffStatus::Unblocked;
  } else if (auto fp = extract_fingerprint(direct_body)) {
    v.status = DiffStatus::ConfirmedBlocked;
    v.fingerprint = *fp;
  } else {
    v.status = DiffStatus::NeedsReview;
  }
  return v;
}

DiffVerdict apply_review(DiffVerdict v, bool confirmed_blocked) {
  if (v.status != DiffStatus::NeedsReview) return v;
  if (confirmed_blocked) {
    v.status = DiffStatus::ConfirmedBlocked;
    v.fingerprint = "review";
  } else {
    v.status = DiffStatus::Unblocked;
  }
  return v;
}

std::string review_queue_text(const std::vector<DiffVerdict>& verdicts) {
  std::string out = "# domain\tdifference\tdirect_sha256\tclean_sha256\n";
  char diff[32];
  for (const auto& v : verdicts) {
    if (v.status != DiffStatus::NeedsReview) continue;
    std::snprintf(diff, sizeof diff, "%.3f", v.difference);
    out += v.domain + "\t" + diff + "\t" + v.direct_digest + "\t" + v.clean_digest + "\n";
  }
  return out;
}

namespace {

std::vector<std::string> long_words(const std::optional<std::string>& title) {
  std::vector<std::string> out;
  if (!title) return out;
  std::istringstream in(*title);
  std::string w;
  while (in >> w)
    if (w.size() >= 5) out.push_back(w);
  return out;
}

}  // namespace

OoniComparison ooni_compare(const HttpResponse& experiment, const HttpResponse& control) {
  OoniComparison c;
  auto le = experiment.body.size(), lc = control.body.size();
  if (le == 0 && lc == 0) {
    c.body_length_match = true;
  } else {
    double ratio = static_cast<double>(std::min(le, lc)) / static_cast<double>(std::max(le, lc));
    c.body_length_match = ratio > kOoniBodyProportion;
  }
  std::set<std::string> he, hc;
  for (const auto& [n, v] : experiment.header_fields) he.insert(to_lower(n));
  for (const auto& [n, v] : control.header_fields) hc.insert(to_lower(n));
  c.headers_match = he == hc;
  auto we = long_words(experiment.title_tag ? experiment.title_tag : extract_title(experiment.body));
  auto wc = long_words(control.title_tag ? control.title_tag : extract_title(control.body));
  if (!we.empty() && !wc.empty()) {
    bool same = true;
    for (size_t i = 0; i < std::min(we.size(), wc.size()); ++i) same = same && we[i] == wc[i];
    c.title_match = same;
  }
  c.blocked = !c.body_length_match && !c.headers_match && c.title_match != true;
  return c;
}

// ---------------------------------------------------------------------------
// Probing helpers

namespace {

int count_censor(const std::vector<netsim::Event>& events, Ipv4Addr server, uint16_t sport) {
  int n = 0;
  for (const auto& e : events) {
    if (e.kind != EventKind::Delivered || e.packet.src != server) continue;
    auto* t = e.packet.tcp();
    if (t && t->dport == sport && netsim::looks_like_censor_reply(e.packet)) ++n;
  }
  return n;
}

bool has_genuine(const std::vector<netsim::Event>& events, Ipv4Addr server, uint16_t sport) {
  for (const auto& e : events) {
    if (e.kind != EventKind::Delivered || e.packet.src != server) continue;
    auto* t = e.packet.tcp();
    if (t && t->dport == sport && !t->data.empty() && !netsim::looks_like_censor_reply(e.packet)) return true;
  }
  return false;
}

int penultimate_ttl(netsim::Network& net, const std::string& client, Ipv4Addr server) {
  int n = net.topology().hop_count(client, server);
  if (n < 2) throw std::invalid_argument("no router between " + client + " and " + server.str());
  return n - 1;
}

}  // namespace

FetchResult fetch_direct(netsim::Network& net, const std::string& client, const std::string& domain, Ipv4Addr server,
                         const RequestVariant& variant, uint16_t port, int ttl) {
  if (port == 443) throw Unsupported("HTTPS probing is not supported");
  FetchResult r;
  netsim::TcpClient conn(net, client, server, port);
  if (!conn.connect()) return r;
  r.connected = true;
  auto events = conn.send_request(segment_http(make_get(domain, variant)), ttl);
  for (const auto& e : events)
    if (e.kind == EventKind::Delivered && e.packet.src == server) r.packets.push_back(e.packet);
  r.censor_reply = count_censor(events, server, conn.sport()) > 0;
  r.genuine_reply = has_genuine(events, server, conn.sport());
  auto rs = parse_http_responses(conn.stream());
  if (!rs.empty()) r.response = rs.front();
  return r;
}

std::optional<HttpResponse> fetch_clean(const netsim::Network& net, const std::string& domain, Ipv4Addr server) {
  auto body = net.clean_fetch(domain, server);
  if (!body) return std::nullopt;
  HttpResponse r;
  r.header_fields = netsim::genuine_headers();
  r.header_fields.emplace_back("Content-Length", std::to_string(body->size()));
  r.body = *body;
  r.title_tag = extract_title(r.body);
  return r;
}

std::string to_string(TransportVerdict v) {
  return v == TransportVerdict::TcpIpFiltered ? "TcpIpFiltered" : "NotFiltered";
}

TransportVerdict detect_transport_filtering(netsim::Network& net, const std::string& client, Ipv4Addr server,
                                            uint16_t port) {
  if (!net.clean_handshake(server, port)) throw SiteDown(server.str() + " is unreachable from the clean vantage");
  for (int attempt = 0; attempt < 5; ++attempt) {
    if (attempt) net.advance(2);
    netsim::TcpClient conn(net, client, server, port);
    if (conn.connect()) return TransportVerdict::NotFiltered;
  }
  return TransportVerdict::TcpIpFiltered;
}

std::string to_string(TriggerVerdict v) {
  switch (v) {
    case TriggerVerdict::RequestOnly: return "RequestOnly";
    case TriggerVerdict::ResponseOnly: return "ResponseOnly";
    case TriggerVerdict::Both: return "Both";
  }
  return "?";
}

TriggerVerdict trigger_analysis(netsim::Network& net, const std::string& client, const std::string& domain,
                                Ipv4Addr server, const std::string& allowed_domain) {
  int ttl = penultimate_ttl(net, client, server);
  netsim::TcpClient conn(net, client, server);
  if (!conn.connect()) throw InconsistentCensorship("handshake with " + server.str() + " failed");
  auto request = serialize_http(make_get(domain));
  uint32_t seq = conn.snd_nxt();
  auto first = conn.send_segment(tcp::kPsh | tcp::kAck, request, ttl);
  // The first copy never reached the server, so the second reuses its sequence number.
  auto second = conn.send_segment(tcp::kPsh | tcp::kAck, request, ttl + 1, seq);
  bool r1 = count_censor(first, server, conn.sport()) > 0;
  bool r2 = count_censor(second, server, conn.sport()) > 0;
  if (!r1 && !r2) throw InconsistentCensorship("no censor reply for " + domain + " via " + server.str());
  if (!r1) return TriggerVerdict::ResponseOnly;

  // Look for a request the censor cannot read but the server can.
  std::vector<RequestVariant> candidates = {variant::KeywordCase{"HOST"}, variant::HostWhitespace{2, 0, false},
                                            variant::DoubleHost{allowed_domain}, variant::Fragmented{}};
  for (const auto& v : candidates) {
    auto probe = fetch_direct(net, client, domain, server, v, 80, ttl);
    if (!probe.connected || probe.censor_reply) continue;
    auto full = fetch_direct(net, client, domain, server, v);
    if (full.censor_reply) return TriggerVerdict::Both;
    if (full.response && full.response->status == 200) return TriggerVerdict::RequestOnly;
  }
  throw InconsistentCensorship("no censor-invisible request found for " + domain);
}

std::string to_string(Placement p) {
  switch (p) {
    case Placement::HostField: return "HostField";
    case Placement::GetPath: return "GetPath";
    case Placement::HeaderOffset: return "HeaderOffset";
  }
  return "?";
}

std::set<Placement> fuzz_trigger_fields(netsim::Network& net, const std::string& client, Ipv4Addr server,
                                        const std::string& censored_domain, const std::string& allowed_domain) {
  int ttl = penultimate_ttl(net, client, server);
  auto random_letters = [&](size_t n) {
    std::string s;
    for (size_t i = 0; i < n; ++i) s += static_cast<char>('a' + net.rng().below(26));
    return s;
  };
  std::vector<std::pair<Placement, RawHttpRequest>> probes;
  probes.emplace_back(Placement::HostField, make_get(censored_domain));
  auto path = make_get(allowed_domain);
  path.request_line = "GET /" + censored_domain + " HTTP/1.1";
  probes.emplace_back(Placement::GetPath, path);
  auto offset = make_get(allowed_domain);
  offset.header_lines.push_back("X-Padding: " + random_letters(1 + net.rng().below(40)) + censored_domain +
                                random_letters(net.rng().below(40)));
  probes.emplace_back(Placement::HeaderOffset, offset);

  std::set<Placement> out;
  for (const auto& [placement, req] : probes) {
    netsim::TcpClient conn(net, client, server);
    if (!conn.connect()) continue;
    auto events = conn.send_request(segment_http(req), ttl);
    if (count_censor(events, server, conn.sport()) > 0) out.insert(placement);
  }
  return out;
}

StatefulnessReport statefulness_probe(netsim::Network& net, const std::string& client, const std::string& domain,
                                      Ipv4Addr server) {
  int ttl = penultimate_ttl(net, client, server);
  auto request = serialize_http(make_get(domain));
  StatefulnessReport rep;
  {
    netsim::TcpClient c(net, client, server);
    c.send_segment(tcp::kSyn, {}, ttl);
    rep.script_censor_packets[0] = count_censor(c.send_segment(tcp::kPsh | tcp::kAck, request, ttl), server, c.sport());
  }
  {
    netsim::TcpClient c(net, client, server);
    c.send_segment(tcp::kSyn | tcp::kAck, {}, ttl);
    rep.script_censor_packets[1] = count_censor(c.send_segment(tcp::kPsh | tcp::kAck, request, ttl), server, c.sport());
  }
  {
    netsim::TcpClient c(net, client, server);
    c.send_segment(tcp::kSyn, {});
    rep.script_censor_packets[2] = count_censor(c.send_segment(tcp::kPsh | tcp::kAck, request, ttl), server, c.sport());
  }
  {
    netsim::TcpClient c(net, client, server);
    rep.script_censor_packets[3] = count_censor(c.send_segment(tcp::kPsh | tcp::kAck, request, ttl), server, c.sport());
  }
  {
    netsim::TcpClient c(net, client, server);
    if (!c.connect()) throw InconsistentCensorship("control handshake with " + server.str() + " failed");
    rep.control_censor_packets = count_censor(c.send_segment(tcp::kPsh | tcp::kAck, request, ttl), server, c.sport());
  }
  int partial = 0;
  for (auto n : rep.script_censor_packets) partial += n;
  if (rep.control_censor_packets == 0 && partial == 0)
    throw InconsistentCensorship("full-handshake GET for " + domain + " did not trigger");
  rep.stateful = partial == 0;
  return rep;
}

// ---------------------------------------------------------------------------
// Evidence and classification

Evidence collect_evidence(netsim::Network& net, const std::string& client, const std::string& domain, Ipv4Addr server,
                          int trials, bool probe_state) {
  Evidence ev;
  ev.domain = domain;
  ev.server = server;
  ev.hops = net.topology().traceroute(client, server);
  int n = static_cast<int>(ev.hops.size());
  tracer::ProbeSpec spec;
  spec.kind = tracer::HttpGet{make_get(domain)};
  spec.dst = server;
  spec.ttl_max = std::min(64, n + 1);
  spec.exhaustive = true;
  ev.trace = tracer::iterative_trace(net, client, spec);

  Ipv4Addr client_addr = net.topology().node(client).addr;
  for (int i = 0; i < trials; ++i) {
    netsim::TcpClient conn(net, client, server);
    if (!conn.connect()) continue;
    size_t before = net.receipt_log(server).size();
    auto events = conn.send_request(segment_http(make_get(domain)));
    Trial t;
    for (const auto& e : events)
      if (e.kind == EventKind::Delivered) t.transcript.push_back(e.packet);
    t.censor_reply = count_censor(events, server, conn.sport()) > 0;
    t.genuine_reply = has_genuine(events, server, conn.sport());
    const auto& log = net.receipt_log(server);
    if (!log.empty() || net.topology().node_by_addr(server)) {
      bool got = false;
      for (size_t k = before; k < log.size(); ++k) {
        auto* seg = log[k].packet.tcp();
        if (seg && log[k].packet.src == client_addr && seg->sport == conn.sport() && !seg->data.empty()) got = true;
      }
      t.server_got_request = got;
    }
    ev.trials.push_back(std::move(t));
  }

  if (net.clean_handshake(server, kAltPort)) {
    auto alt = fetch_direct(net, client, domain, server, variant::Canonical{}, kAltPort);
    if (alt.connected) ev.alt_port_triggered = alt.censor_reply;
  }
  if (probe_state) {
    try {
      ev.stateful = statefulness_probe(net, client, domain, server).stateful;
    } catch (const InconsistentCensorship&) {
    }
  }
  return ev;
}

MiddleboxClass classify_middlebox(const Evidence& ev) {
  std::vector<Packet> transcript;
  for (const auto& t : ev.trials) transcript.insert(transcript.end(), t.transcript.begin(), t.transcript.end());

  std::vector<const Trial*> triggered;
  for (const auto& t : ev.trials)
    if (t.censor_reply) triggered.push_back(&t);
  if (triggered.empty()) throw Unclassified("no triggered flow in the evidence", transcript);

  MiddleboxClass c;
  if (!ev.trace.records.empty()) c.location = tracer::locate_middlebox(ev.trace, ev.hops);

  bool genuine = false, dropped = false, reached = false;
  for (auto* t : triggered) {
    genuine = genuine || t->genuine_reply;
    if (t->server_got_request) {
      dropped = dropped || !*t->server_got_request;
      reached = reached || *t->server_got_request;
    }
  }
  bool icmp_beyond = false;
  if (c.location) {
    for (const auto& p : ev.trace.transcript) {
      if (!p.icmp()) continue;
      for (const auto& h : ev.hops)
        if (h.addr && *h.addr == p.src && h.index > c.location->hop) icmp_beyond = true;
    }
  }
  bool wm = genuine || icmp_beyond || reached;
  if (wm && dropped) throw Unclassified("server response and post-trigger drop both observed", transcript);
  bool receipts_known = std::any_of(triggered.begin(), triggered.end(), [](const Trial* t) { return t->server_got_request.has_value(); });
  if (wm) c.kind = netsim::MiddleboxKind::WM;
  else if (dropped || !receipts_known) c.kind = netsim::MiddleboxKind::IM;
  else throw Unclassified("no evidence separating IM from WM", transcript);

  std::vector<const Packet*> injected;
  for (auto* t : triggered)
    for (const auto& p : t->transcript)
      if (p.src == ev.server && netsim::looks_like_censor_reply(p)) injected.push_back(&p);
  bool overt = std::any_of(injected.begin(), injected.end(), [](const Packet* p) { return !p->tcp()->data.empty(); });
  c.covert = !overt;
  if (c.covert && c.kind == netsim::MiddleboxKind::WM)
    throw Unclassified("bare-RST censorship from a tap does not fit the model", transcript);

  if (injected.size() >= 10 &&
      std::all_of(injected.begin(), injected.end(), [&](const Packet* p) { return p->ip_id == injected.front()->ip_id; }))
    c.fixed_ip_id = injected.front()->ip_id;

  for (auto* p : injected) {
    auto body = netsim::response_body(*p);
    if (!body) continue;
    if (auto fp = extract_fingerprint(*body)) {
      c.fingerprint = *fp;
      break;
    }
    if (c.fingerprint.empty()) c.fingerprint = "sha256:" + sha256_hex(*body).substr(0, 16);
  }
  if (ev.alt_port_triggered) c.port_scope = *ev.alt_port_triggered ? PortScope::AllPorts : PortScope::Port80Only;
  c.stateful = ev.stateful;
  return c;
}

// ---------------------------------------------------------------------------
// JSON

json to_json(const DiffVerdict& v) {
  json j;
  j["domain"] = v.domain;
  j["difference"] = std::round(v.difference * 1000) / 1000;
  j["status"] = to_string(v.status);
  if (!v.fingerprint.empty()) j["fingerprint"] = v.fingerprint;
  j["direct_sha256"] = v.direct_digest;
  j["clean_sha256"] = v.clean_digest;
  return j;
}

json to_json(const MiddleboxClass& c) {
  json j;
  j["kind"] = netsim::to_string(c.kind);
  j["visibility"] = c.covert ? "Covert" : "Overt";
  j["stateful"] = c.stateful ? json(*c.stateful) : json(nullptr);
  j["port_scope"] = c.port_scope ? json(*c.port_scope == PortScope::AllPorts ? "AllPorts" : "Port80Only") : json(nullptr);
  j["fingerprint"] = c.fingerprint;
  j["fixed_ip_id"] = c.fixed_ip_id ? json(*c.fixed_ip_id) : json(nullptr);
  if (c.location) {
    j["location"] = {{"hop", c.location->hop},
                     {"addr", c.location->addr ? json(c.location->addr->str()) : json("anonymized")},
                     {"as", c.location->as_label}};
  } else {
    j["location"] = nullptr;
  }
  return j;
}

json to_json(const Evidence& e) {
  json j;
  j["domain"] = e.domain;
  j["server"] = e.server.str();
  json trace = json::array();
  for (const auto& r : e.trace.records) {
    json t{{"ttl", r.ttl}, {"kind", tracer::to_string(r.kind)}};
    if (r.addr) t["addr"] = r.addr->str();
    trace.push_back(t);
  }
  j["trace"] = trace;
  json trials = json::array();
  for (const auto& t : e.trials) {
    json tj{{"censor_reply", t.censor_reply}, {"genuine_reply", t.genuine_reply}};
    tj["server_got_request"] = t.server_got_request ? json(*t.server_got_request) : json(nullptr);
    json pk = json::array();
    for (const auto& p : t.transcript) pk.push_back(packet_to_json(p));
    tj["transcript"] = pk;
    trials.push_back(tj);
  }
  j["trials"] = trials;
  j["alt_port_triggered"] = e.alt_port_triggered ? json(*e.alt_port_triggered) : json(nullptr);
  j["stateful"] = e.stateful ? json(*e.stateful) : json(nullptr);
  return j;
}

}  // namespace censorlab::http_detect
