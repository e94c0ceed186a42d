#include "censorlab/evasion.hpp"

#include <charconv>

#include "censorlab/digest.hpp"
#include "censorlab/dns_detect.hpp"

namespace censorlab::evasion {

std::string strategy_name(const Strategy& s) {
  return std::visit(
      [](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, DropFinRst>) {
          return v.ip_id ? "drop-fin-rst:" + std::to_string(*v.ip_id) : "drop-fin-rst";
        } else if constexpr (std::is_same_v<T, AltResolver>) {
          return "alt-resolver:" + v.addr.str();
        } else {
          return variant_name(RequestVariant{v});
        }
      },
      s);
}

Strategy parse_strategy(std::string_view text) {
  auto colon = text.find(':');
  auto name = text.substr(0, colon);
  auto arg = colon == std::string_view::npos ? std::string_view{} : text.substr(colon + 1);
  if (name == "drop-fin-rst") {
    DropFinRst d;
    if (!arg.empty()) {
      unsigned v = 0;
      auto [end, ec] = std::from_chars(arg.data(), arg.data() + arg.size(), v);
      if (ec != std::errc{} || end != arg.data() + arg.size() || v > 0xffff)
        throw std::invalid_argument("bad ip_id in '" + std::string(text) + "'");
      d.ip_id = static_cast<uint16_t>(v);
    }
    return d;
  }
  if (name == "alt-resolver") return AltResolver{Ipv4Addr::from_string(arg)};
  auto v = parse_request_variant(text);
  return std::visit(
      [&](auto&& x) -> Strategy {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, variant::Canonical>) {
          throw std::invalid_argument("'canonical' is not an evasion strategy");
        } else {
          return x;
        }
      },
      v);
}

std::string to_string(OutcomeStatus s) {
  switch (s) {
    case OutcomeStatus::Bypassed: return "Bypassed";
    case OutcomeStatus::Blocked: return "Blocked";
    case OutcomeStatus::NotCensored: return "NotCensored";
    case OutcomeStatus::Inapplicable: return "Inapplicable";
    case OutcomeStatus::Error: return "Error";
  }
  return "?";
}

namespace {

constexpr int kAttempts = 5;

struct Delivery {
  std::vector<HttpResponse> responses;
  std::vector<Packet> filtered;
};

Delivery run_flow(netsim::Network& net, const std::string& client, const std::string& domain, Ipv4Addr server,
                  const RequestVariant& variant, const std::optional<DropFinRst>& filter) {
  Delivery d;
  if (filter) {
    netsim::DropRule rule;
    rule.flags_any = tcp::kFin | tcp::kRst;
    rule.ip_id = filter->ip_id;
    rule.src = server;
    net.set_client_filter(client, {rule});
  }
  netsim::TcpClient conn(net, client, server);
  bool ok = conn.connect();
  std::vector<netsim::Event> events;
  if (ok) events = conn.send_request(segment_http(make_get(domain, variant)));
  if (filter) net.clear_client_filter(client);
  if (!ok) throw http_detect::SiteDown("handshake with " + server.str() + " failed");
  for (const auto& e : events)
    if (e.kind == netsim::EventKind::Filtered) d.filtered.push_back(e.packet);
  d.responses = parse_http_responses(conn.stream());
  return d;
}

void judge(StrategyOutcome& out, const Delivery& d, const std::string& clean_digest) {
  out.filtered = d.filtered;
  if (!d.filtered.empty()) out.side_effects.push_back(std::to_string(d.filtered.size()) + " packets filtered");
  for (size_t i = 1; i < d.responses.size(); ++i)
    out.side_effects.push_back(std::to_string(d.responses[i].status) + " " + reason_phrase(d.responses[i].status) +
                               " for a follow-on request");
  if (d.responses.empty()) return;
  out.content_digest = sha256_hex(d.responses.front().body);
  out.bypassed = d.responses.front().status == 200 && *out.content_digest == clean_digest;
  out.status = out.bypassed ? OutcomeStatus::Bypassed : OutcomeStatus::Blocked;
}

std::string clean_http_digest(const netsim::Network& net, const std::string& domain, Ipv4Addr server) {
  auto body = net.clean_fetch(domain, server);
  if (!body) throw http_detect::SiteDown(domain + " is not served by " + server.str());
  return sha256_hex(*body);
}

}  // namespace

StrategyOutcome apply(netsim::Network& net, const std::string& client, const Target& target, const Strategy& s) {
  StrategyOutcome out;
  out.strategy = s;
  bool dns_strategy = std::holds_alternative<AltResolver>(s);
  if (dns_strategy != (target.type == CensorshipType::Dns))
    throw Inapplicable(strategy_name(s) + " does not address " +
                       (target.type == CensorshipType::Dns ? "DNS" : "HTTP") + " censorship");

  if (auto* alt = std::get_if<AltResolver>(&s)) {
    auto clean = net.clean_resolve(target.domain);
    if (clean.empty()) throw http_detect::SiteDown(target.domain + " has no clean resolution");
    auto digest = clean_http_digest(net, target.domain, clean.front());
    auto r = dns_detect::resolve_direct(net, client, alt->addr, target.domain);
    if (!r) {
      out.side_effects.push_back("no answer from " + alt->addr.str());
      return out;
    }
    judge(out, run_flow(net, client, target.domain, *r->answers.begin(), variant::Canonical{}, std::nullopt), digest);
    return out;
  }

  auto digest = clean_http_digest(net, target.domain, target.server);
  std::optional<DropFinRst> filter;
  RequestVariant variant = variant::Canonical{};
  std::visit(
      [&](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, DropFinRst>) filter = v;
        else if constexpr (!std::is_same_v<T, AltResolver>) variant = v;
      },
      s);
  // A tap that loses its race lets the canonical request through now and
  // then, so a strategy only counts when every attempt comes back clean.
  for (int i = 0; i < kAttempts; ++i) {
    StrategyOutcome attempt;
    attempt.strategy = s;
    judge(attempt, run_flow(net, client, target.domain, target.server, variant, filter), digest);
    out = std::move(attempt);
    if (!out.bypassed) break;
  }
  return out;
}

namespace {

bool canonical_censored(netsim::Network& net, const std::string& client, const Target& target) {
  if (target.type == CensorshipType::Dns) {
    if (!target.resolver) throw std::invalid_argument("DNS target needs the resolver in use");
    auto r = dns_detect::resolve_direct(net, client, *target.resolver, target.domain);
    if (!r) return true;
    auto clean = dns_detect::resolve_clean(net, target.domain);
    return dns_detect::overlap_filter(*r, clean) == dns_detect::Overlap::Disjoint;
  }
  auto digest = clean_http_digest(net, target.domain, target.server);
  for (int i = 0; i < kAttempts; ++i) {
    auto d = run_flow(net, client, target.domain, target.server, variant::Canonical{}, std::nullopt);
    if (d.responses.empty() || d.responses.front().status != 200 || sha256_hex(d.responses.front().body) != digest)
      return true;
  }
  return false;
}

}  // namespace

std::vector<StrategyOutcome> evaluate_catalog(netsim::Network& net, const std::string& client, const Target& target,
                                              const std::vector<Strategy>& strategies) {
  std::vector<StrategyOutcome> out;
  bool censored = true;
  try {
    censored = canonical_censored(net, client, target);
  } catch (const std::exception&) {
    // Leave it to the per-strategy runs to report the failure.
  }
  for (const auto& s : strategies) {
    StrategyOutcome o;
    o.strategy = s;
    try {
      o = apply(net, client, target, s);
      if (!censored) {
        o.status = OutcomeStatus::NotCensored;
        o.bypassed = true;
      }
    } catch (const Inapplicable& e) {
      o.status = OutcomeStatus::Inapplicable;
      o.error = e.what();
    } catch (const std::exception& e) {
      o.status = OutcomeStatus::Error;
      o.error = e.what();
    }
    out.push_back(std::move(o));
  }
  return out;
}

std::vector<Strategy> full_catalog(const CatalogParams& p) {
  std::vector<Strategy> out = {variant::KeywordCase{"HOST"}, DropFinRst{}, variant::HostWhitespace{2, 0, false},
                               variant::DoubleHost{p.allowed_domain}, variant::Fragmented{}};
  if (p.alt_resolver) out.push_back(AltResolver{*p.alt_resolver});
  return out;
}

std::vector<Strategy> recommend(const std::optional<http_detect::MiddleboxClass>& cls, const CatalogParams& p) {
  if (!cls) return full_catalog(p);
  if (cls->kind == netsim::MiddleboxKind::WM) {
    if (cls->fixed_ip_id) return {DropFinRst{cls->fixed_ip_id}, variant::KeywordCase{"HOST"}};
    return {variant::KeywordCase{"HOST"}, DropFinRst{}};
  }
  if (cls->covert) return {variant::DoubleHost{p.allowed_domain}};
  return {variant::HostWhitespace{2, 0, false}};
}

std::vector<Strategy> recommend_for_dns(const CatalogParams& p) {
  if (!p.alt_resolver) throw std::invalid_argument("no alternate resolver configured");
  return {AltResolver{*p.alt_resolver}};
}

json to_json(const StrategyOutcome& o) {
  json j;
  j["strategy"] = strategy_name(o.strategy);
  j["status"] = to_string(o.status);
  j["bypassed"] = o.bypassed;
  j["content_sha256"] = o.content_digest ? json(*o.content_digest) : json(nullptr);
  j["side_effects"] = o.side_effects;
  if (!o.error.empty()) j["error"] = o.error;
  return j;
}

}  // namespace censorlab::evasion
