#include "censorlab/metrics.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "censorlab/dns_detect.hpp"

namespace censorlab::metrics {

Fraction::Fraction(int64_t n, int64_t d) {
  if (d <= 0 || n < 0) throw std::invalid_argument("fraction needs n >= 0 and d > 0");
  auto g = std::gcd(n, d);
  num = n / g;
  den = d / g;
}

std::string Fraction::str3() const {
  __int128 scaled = static_cast<__int128>(num) * 1000;
  auto q = static_cast<int64_t>(scaled / den);
  auto r = static_cast<int64_t>(scaled % den);
  if (2 * r >= den) ++q;
  std::string frac = std::to_string(q % 1000);
  return std::to_string(q / 1000) + "." + std::string(3 - frac.size(), '0') + frac;
}

json to_json(const Fraction& f) { return json{{"value", f.str3()}, {"exact", f.exact()}}; }

std::string to_string(Scope s) {
  switch (s) {
    case Scope::DnsResolvers: return "DnsResolvers";
    case Scope::HttpPathsInternal: return "HttpPathsInternal";
    case Scope::HttpPathsExternal: return "HttpPathsExternal";
  }
  return "?";
}

CoverageReport coverage(const std::set<std::string>& poisoned, const std::set<std::string>& total, Scope scope) {
  if (total.empty()) throw std::invalid_argument("coverage over an empty unit set");
  for (const auto& p : poisoned)
    if (!total.count(p)) throw std::invalid_argument("poisoned unit '" + p + "' is not in the total set");
  auto r = coverage(static_cast<int64_t>(poisoned.size()), static_cast<int64_t>(total.size()), scope);
  r.poisoned_units = poisoned;
  return r;
}

CoverageReport coverage(int64_t poisoned, int64_t total, Scope scope) {
  if (total <= 0) throw std::invalid_argument("coverage over an empty unit set");
  if (poisoned < 0 || poisoned > total) throw std::invalid_argument("poisoned count out of range");
  CoverageReport r;
  r.scope = scope;
  r.poisoned_count = poisoned;
  r.total_count = total;
  r.coverage = Fraction(poisoned, total);
  return r;
}

ConsistencyReport consistency(const std::map<std::string, std::set<std::string>>& blocking,
                              const std::set<std::string>& poisoned_units) {
  if (poisoned_units.empty()) throw std::invalid_argument("consistency over an empty unit set");
  std::map<std::string, int64_t> counts;
  for (const auto& [unit, domains] : blocking) {
    if (!poisoned_units.count(unit)) throw std::invalid_argument("unit '" + unit + "' is not a poisoned unit");
    for (const auto& d : domains) ++counts[d];
  }
  ConsistencyReport r;
  auto units = static_cast<int64_t>(poisoned_units.size());
  int64_t sum = 0;
  for (const auto& [d, c] : counts) {
    r.fractions[d] = Fraction(c, units);
    sum += c;
  }
  if (!counts.empty()) r.consistency = Fraction(sum, units * static_cast<int64_t>(counts.size()));
  return r;
}

std::string consistency_tsv(const ConsistencyReport& r) {
  std::vector<std::pair<std::string, Fraction>> rows(r.fractions.begin(), r.fractions.end());
  std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
    return static_cast<__int128>(a.second.num) * b.second.den > static_cast<__int128>(b.second.num) * a.second.den;
  });
  std::string out = "domain_id\tfraction\n";
  for (size_t i = 0; i < rows.size(); ++i) out += std::to_string(i + 1) + "\t" + rows[i].second.str3() + "\n";
  return out;
}

PrecisionRecall precision_recall(const std::set<std::string>& reported, const std::set<std::string>& ground_truth) {
  if (reported.empty()) throw std::invalid_argument("precision is undefined for an empty reported set");
  if (ground_truth.empty()) throw std::invalid_argument("recall is undefined for an empty ground truth");
  PrecisionRecall r;
  r.reported = reported.size();
  r.ground_truth = ground_truth.size();
  for (const auto& x : reported) r.overlap += ground_truth.count(x);
  r.precision = Fraction(static_cast<int64_t>(r.overlap), static_cast<int64_t>(r.reported));
  r.recall = Fraction(static_cast<int64_t>(r.overlap), static_cast<int64_t>(r.ground_truth));
  return r;
}

namespace {

bool path_poisoned(netsim::Network& net, const std::string& client, Ipv4Addr target,
                   const std::vector<std::string>& pbw) {
  for (const auto& domain : pbw) {
    auto r = http_detect::fetch_direct(net, client, domain, target);
    if (r.censor_reply) return true;
  }
  return false;
}

std::string path_id(const std::string& client, Ipv4Addr target) { return client + "->" + target.str(); }

}  // namespace

CoverageReport http_coverage_internal(netsim::Network& net, const std::string& client,
                                      const std::vector<Ipv4Addr>& targets, const std::vector<std::string>& pbw) {
  std::set<std::string> total, poisoned;
  for (auto t : targets) {
    auto id = path_id(client, t);
    total.insert(id);
    if (path_poisoned(net, client, t, pbw)) poisoned.insert(id);
  }
  return coverage(poisoned, total, Scope::HttpPathsInternal);
}

std::vector<Ipv4Addr> sample_external_hosts(const netsim::Network& net, const std::vector<Prefix>& prefixes,
                                            uint64_t seed) {
  if (prefixes.empty()) throw std::invalid_argument("no prefixes to sample");
  netsim::SimRng rng(seed);
  std::vector<Ipv4Addr> out;
  for (const auto& p : prefixes) {
    std::vector<Ipv4Addr> open;
    for (auto a : dns_detect::expand(p))
      if (net.clean_handshake(a, 80)) open.push_back(a);
    for (int k = 0; k < 2 && !open.empty(); ++k) {
      auto i = rng.below(open.size());
      out.push_back(open[i]);
      open.erase(open.begin() + static_cast<std::ptrdiff_t>(i));
    }
  }
  return out;
}

CoverageReport http_coverage_external(netsim::Network& net, const std::vector<std::string>& vantages,
                                      const std::vector<Prefix>& prefixes, const std::vector<std::string>& pbw,
                                      uint64_t seed) {
  auto hosts = sample_external_hosts(net, prefixes, seed);
  std::set<std::string> total, poisoned;
  for (const auto& v : vantages) {
    for (auto h : hosts) {
      net.topology().traceroute(v, h);
      auto id = path_id(v, h);
      total.insert(id);
      if (path_poisoned(net, v, h, pbw)) poisoned.insert(id);
    }
  }
  if (total.empty()) throw std::invalid_argument("no external path could be sampled");
  return coverage(poisoned, total, Scope::HttpPathsExternal);
}

std::string to_string(AttributionRule r) {
  switch (r) {
    case AttributionRule::VisibleHop: return "VisibleHop";
    case AttributionRule::FlankingHops: return "FlankingHops";
    case AttributionRule::Fingerprint: return "Fingerprint";
  }
  return "?";
}

namespace {

std::optional<std::string> fingerprint_as(const http_detect::Evidence& ev) {
  for (const auto& r : ev.trace.records)
    if (r.kind == tracer::RecordKind::CensorResponse)
      if (auto e = netsim::match_fingerprint(r.body)) return e->as_label;
  for (const auto& t : ev.trials)
    for (const auto& p : t.transcript)
      if (auto body = netsim::response_body(p))
        if (auto e = netsim::match_fingerprint(*body)) return e->as_label;
  return std::nullopt;
}

}  // namespace

CollateralAttribution attribute_collateral(const std::string& victim_as,
                                           const std::vector<http_detect::Evidence>& blocked) {
  CollateralAttribution out;
  out.victim_as = victim_as;
  for (const auto& ev : blocked) {
    if (out.per_domain.count(ev.domain) || out.unattributed.count(ev.domain)) continue;
    std::optional<std::pair<std::string, AttributionRule>> hit;
    std::optional<tracer::Located> loc;
    if (!ev.trace.records.empty()) loc = tracer::locate_middlebox(ev.trace, ev.hops);
    if (loc && loc->addr && !loc->as_label.empty()) {
      hit = {{loc->as_label, AttributionRule::VisibleHop}};
    } else if (loc && loc->hop >= 2 && static_cast<size_t>(loc->hop) < ev.hops.size()) {
      const auto& before = ev.hops[static_cast<size_t>(loc->hop) - 2];
      const auto& after = ev.hops[static_cast<size_t>(loc->hop)];
      if (!before.anonymized() && !after.anonymized() && before.as_label == after.as_label &&
          !before.as_label.empty())
        hit = {{before.as_label, AttributionRule::FlankingHops}};
    }
    if (!hit)
      if (auto as = fingerprint_as(ev)) hit = {{*as, AttributionRule::Fingerprint}};
    if (hit) {
      out.per_domain[ev.domain] = *hit;
      ++out.by_as[hit->first];
    } else {
      out.unattributed.insert(ev.domain);
    }
  }
  return out;
}

json to_json(const CoverageReport& r) {
  json j;
  j["scope"] = to_string(r.scope);
  j["poisoned"] = r.poisoned_count;
  j["total"] = r.total_count;
  j["coverage"] = to_json(r.coverage);
  if (r.reference) {
    j["reference_coverage"] = *r.reference;
    j["note"] = "computed " + r.coverage.str3() + " from the unit counts; the externally reported figure differs";
  }
  return j;
}

json to_json(const ConsistencyReport& r) {
  json j;
  j["consistency"] = to_json(r.consistency);
  json f = json::object();
  for (const auto& [d, x] : r.fractions) f[d] = x.str3();
  j["fractions"] = f;
  return j;
}

json to_json(const PrecisionRecall& r) {
  return json{{"reported", r.reported},       {"ground_truth", r.ground_truth}, {"overlap", r.overlap},
              {"precision", to_json(r.precision)}, {"recall", to_json(r.recall)}};
}

json to_json(const CollateralAttribution& r) {
  json j;
  j["victim_as"] = r.victim_as;
  json by = json::object();
  for (const auto& [as, n] : r.by_as) by[as] = n;
  j["by_as"] = by;
  json per = json::object();
  for (const auto& [d, a] : r.per_domain) per[d] = {{"as", a.first}, {"rule", to_string(a.second)}};
  j["per_domain"] = per;
  j["unattributed"] = r.unattributed;
  return j;
}

}  // namespace censorlab::metrics
