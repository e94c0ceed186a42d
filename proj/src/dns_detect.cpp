#include "censorlab/dns_detect.hpp"

#include <algorithm>

namespace censorlab::dns_detect {

Overlap overlap_filter(const ResolutionRecord& direct, const ResolutionRecord& clean) {
  if (to_lower(direct.domain) != to_lower(clean.domain))
    throw std::invalid_argument("overlap_filter: '" + direct.domain + "' vs '" + clean.domain + "'");
  for (auto a : direct.answers)
    if (clean.answers.count(a)) return Overlap::Overlapping;
  return Overlap::Disjoint;
}

std::map<Ipv4Addr, std::set<std::string>> frequency_analysis(const std::vector<ResolutionRecord>& direct,
                                                             const std::set<Ipv4Addr>& shared_hosting_whitelist) {
  std::map<Ipv4Addr, std::set<std::string>> seen;
  for (const auto& r : direct)
    for (auto a : r.answers)
      if (!shared_hosting_whitelist.count(a)) seen[a].insert(to_lower(r.domain));
  for (auto it = seen.begin(); it != seen.end();) {
    if (it->second.size() < 2) it = seen.erase(it);
    else ++it;
  }
  return seen;
}

const std::vector<Prefix>& bogon_prefixes() {
  static const std::vector<Prefix> kBogons = [] {
    std::vector<Prefix> out;
    for (const char* p : {"0.0.0.0/8", "10.0.0.0/8", "100.64.0.0/10", "127.0.0.0/8", "169.254.0.0/16",
                          "172.16.0.0/12", "192.0.0.0/24", "192.0.2.0/24", "192.168.0.0/16", "198.18.0.0/15",
                          "198.51.100.0/24", "203.0.113.0/24", "240.0.0.0/4"})
      out.push_back(Prefix::from_string(p));
    return out;
  }();
  return kBogons;
}

bool is_bogon(Ipv4Addr ip) {
  const auto& b = bogon_prefixes();
  return std::any_of(b.begin(), b.end(), [&](const Prefix& p) { return p.contains(ip); });
}

bool same_as_heuristic(Ipv4Addr ip, const std::vector<Prefix>& client_as_prefixes) {
  return std::any_of(client_as_prefixes.begin(), client_as_prefixes.end(),
                     [&](const Prefix& p) { return p.contains(ip); });
}

std::string to_string(Status s) {
  switch (s) {
    case Status::Uncensored: return "Uncensored";
    case Status::Censored: return "Censored";
    case Status::Unresolved: return "Unresolved";
  }
  return "?";
}

std::string to_string(Reason r) {
  switch (r) {
    case Reason::None: return "";
    case Reason::SameAs: return "SameAs";
    case Reason::Bogon: return "Bogon";
    case Reason::FrequencyCluster: return "FrequencyCluster";
  }
  return "?";
}

std::optional<ResolutionRecord> resolve_direct(netsim::Network& net, const std::string& client, Ipv4Addr resolver,
                                               const std::string& domain) {
  Packet p;
  p.dst = resolver;
  p.ip_id = net.rng().u16();
  uint16_t txid = net.rng().u16();
  p.payload = DnsMessage{DnsKind::Query, txid, domain, {}};
  for (const auto& e : net.send(client, std::move(p))) {
    if (e.kind != netsim::EventKind::Delivered) continue;
    auto* d = e.packet.dns();
    if (!d || d->kind != DnsKind::Response || d->txid != txid) continue;
    if (d->answers.empty()) return std::nullopt;
    ResolutionRecord r;
    r.domain = to_lower(domain);
    r.answers.insert(d->answers.begin(), d->answers.end());
    return r;
  }
  return std::nullopt;
}

ResolutionRecord resolve_clean(const netsim::Network& net, const std::string& domain) {
  ResolutionRecord r;
  r.domain = to_lower(domain);
  r.vantage = Vantage::Clean;
  for (auto a : net.clean_resolve(domain)) r.answers.insert(a);
  return r;
}

std::vector<DnsVerdict> screen_domains(netsim::Network& net, const std::string& client, Ipv4Addr resolver,
                                       const std::vector<std::string>& domains, const ScreeningContext& ctx) {
  std::vector<DnsVerdict> out;
  std::vector<ResolutionRecord> disjoint;
  std::vector<size_t> pending;
  for (const auto& domain : domains) {
    DnsVerdict v;
    v.domain = to_lower(domain);
    v.resolver = resolver;
    auto direct = resolve_direct(net, client, resolver, domain);
    if (!direct) {
      out.push_back(v);
      continue;
    }
    v.answers = direct->answers;
    auto clean = resolve_clean(net, domain);
    if (overlap_filter(*direct, clean) == Overlap::Overlapping) {
      v.status = Status::Uncensored;
      out.push_back(v);
      continue;
    }
    bool same_as = std::any_of(v.answers.begin(), v.answers.end(),
                               [&](Ipv4Addr a) { return same_as_heuristic(a, ctx.client_as_prefixes); });
    bool bogon = std::any_of(v.answers.begin(), v.answers.end(), is_bogon);
    if (same_as || bogon) {
      v.status = Status::Censored;
      v.reason = same_as ? Reason::SameAs : Reason::Bogon;
    } else {
      pending.push_back(out.size());
    }
    disjoint.push_back(*direct);
    out.push_back(v);
  }
  auto clusters = frequency_analysis(disjoint, ctx.shared_hosting_whitelist);
  for (auto i : pending) {
    auto& v = out[i];
    bool content_everywhere = std::all_of(v.answers.begin(), v.answers.end(),
                                          [&](Ipv4Addr a) { return net.clean_fetch(v.domain, a).has_value(); });
    if (content_everywhere) {
      v.status = Status::Uncensored;
      continue;
    }
    bool clustered = std::any_of(v.answers.begin(), v.answers.end(), [&](Ipv4Addr a) { return clusters.count(a); });
    if (clustered) {
      v.status = Status::Censored;
      v.reason = Reason::FrequencyCluster;
    }
  }
  return out;
}

std::vector<Ipv4Addr> expand(const Prefix& p) {
  std::vector<Ipv4Addr> out;
  for (uint64_t v = p.first().value; v <= p.last().value; ++v) out.emplace_back(static_cast<uint32_t>(v));
  return out;
}

std::vector<Ipv4Addr> discover_resolvers(netsim::Network& net, const std::string& client, const std::vector<Ipv4Addr>& range,
                                         const std::string& probe_domain, Ipv4Addr known_answer) {
  std::vector<Ipv4Addr> out;
  for (auto addr : range) {
    auto r = resolve_direct(net, client, addr, probe_domain);
    if (r && r->answers.count(known_answer)) out.push_back(addr);
  }
  return out;
}

std::map<Ipv4Addr, std::set<std::string>> find_censorious_resolvers(netsim::Network& net, const std::string& client,
                                                                    const std::vector<Ipv4Addr>& resolvers,
                                                                    const std::vector<std::string>& pbw_list,
                                                                    const ScreeningContext& ctx,
                                                                    std::vector<DnsVerdict>* verdicts) {
  std::map<Ipv4Addr, std::set<std::string>> out;
  for (auto r : resolvers) {
    auto vs = screen_domains(net, client, r, pbw_list, ctx);
    for (const auto& v : vs)
      if (v.status == Status::Censored) out[r].insert(v.domain);
    if (verdicts) verdicts->insert(verdicts->end(), vs.begin(), vs.end());
  }
  return out;
}

json verdicts_to_json(const std::vector<DnsVerdict>& v) {
  json arr = json::array();
  for (const auto& d : v) {
    json j;
    j["domain"] = d.domain;
    j["resolver"] = d.resolver.str();
    j["status"] = to_string(d.status);
    if (d.reason != Reason::None) j["reason"] = to_string(d.reason);
    json a = json::array();
    for (auto ip : d.answers) a.push_back(ip.str());
    j["answers"] = a;
    arr.push_back(j);
  }
  return arr;
}

std::string verdicts_to_csv(const std::vector<DnsVerdict>& v) {
  std::string out = "domain,resolver,status,reason\n";
  for (const auto& d : v)
    out += d.domain + "," + d.resolver.str() + "," + to_string(d.status) + "," + to_string(d.reason) + "\n";
  return out;
}

}  // namespace censorlab::dns_detect
