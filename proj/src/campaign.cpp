#include "censorlab/campaign.hpp"

#include <fstream>
#include <sstream>

#include "censorlab/digest.hpp"
#include "censorlab/dns_detect.hpp"
#include "censorlab/evasion.hpp"
#include "censorlab/http_detect.hpp"
#include "censorlab/json_locate.hpp"
#include "censorlab/metrics.hpp"
#include "censorlab/scenarios.hpp"
#include "censorlab/tracer.hpp"

namespace censorlab::campaign {

namespace fs = std::filesystem;

namespace {

std::string format_error(const fs::path& file, int line, const std::string& msg) {
  return file.string() + (line > 0 ? ":" + std::to_string(line) : "") + ": " + msg;
}

}  // namespace

ConfigFileError::ConfigFileError(fs::path file, int line, const std::string& msg)
    : std::runtime_error(format_error(file, line, msg)), file_(std::move(file)), line_(line) {}

namespace {

const std::set<std::string> kPlanSteps = {"dns", "tcpip", "http", "classify", "evade", "metrics"};

std::string read_file(const fs::path& p, const fs::path& referrer, int ref_line) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw ConfigFileError(referrer, ref_line, "cannot read '" + p.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json parse_json(const std::string& text, const fs::path& file) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigFileError(file, line_of_offset(text, e.byte > 0 ? e.byte - 1 : 0), "invalid JSON");
  }
}

// Campaign-file accessors that point back at the offending line.
class Doc {
 public:
  Doc(const json& j, const std::string& text, fs::path file) : j_(j), text_(text), file_(std::move(file)) {}

  [[noreturn]] void fail(const std::string& pointer, const std::string& msg) const {
    throw ConfigFileError(file_, locate_line(text_, pointer).value_or(0), msg + " (at " + pointer + ")");
  }

  const json* find(const std::string& pointer) const {
    auto ptr = json::json_pointer(pointer);
    return j_.contains(ptr) ? &j_.at(ptr) : nullptr;
  }

  const json& require(const std::string& pointer) const {
    auto* v = find(pointer);
    if (!v) fail(pointer, "missing required value");
    return *v;
  }

  std::string string(const std::string& pointer) const {
    const auto& v = require(pointer);
    if (!v.is_string()) fail(pointer, "expected a string");
    return v.get<std::string>();
  }

  const fs::path& file() const { return file_; }

 private:
  const json& j_;
  const std::string& text_;
  fs::path file_;
};

}  // namespace

CampaignConfig load_campaign(const fs::path& campaign_file, std::optional<uint64_t> seed_override) {
  CampaignConfig cfg;
  cfg.campaign_file = campaign_file;
  auto text = read_file(campaign_file, campaign_file, 0);
  cfg.doc = parse_json(text, campaign_file);
  cfg.campaign_text = text;
  Doc doc(cfg.doc, text, campaign_file);
  if (!cfg.doc.is_object()) doc.fail("", "campaign must be a JSON object");
  auto dir = campaign_file.parent_path();

  auto topo_name = doc.string("/topology");
  auto pbw_name = doc.string("/pbw");
  auto topo_path = dir / topo_name;
  auto topo_text = read_file(topo_path, campaign_file, locate_line(text, "/topology").value_or(0));
  auto topo_doc = parse_json(topo_text, topo_path);
  try {
    cfg.topology = netsim::topology_from_json(topo_doc);
    netsim::build_topology(cfg.topology);
  } catch (const netsim::ConfigError& e) {
    int line = e.pointer().empty() ? 0 : locate_line(topo_text, e.pointer()).value_or(0);
    throw ConfigFileError(topo_path, line, e.what());
  }
  auto pbw_text = read_file(dir / pbw_name, campaign_file, locate_line(text, "/pbw").value_or(0));
  cfg.pbw = scenarios::parse_pbw(pbw_text);
  if (cfg.pbw.empty()) doc.fail("/pbw", "the PBW list is empty");

  if (seed_override) {
    cfg.seed = *seed_override;
  } else {
    const auto& s = doc.require("/seed");
    if (!s.is_number_unsigned()) doc.fail("/seed", "seed must be a non-negative integer");
    cfg.seed = s.get<uint64_t>();
  }
  cfg.client = doc.string("/client");
  bool known = false;
  for (const auto& c : cfg.topology.clients) known = known || c.id == cfg.client;
  if (!known) doc.fail("/client", "client '" + cfg.client + "' is not in the topology");
  if (auto* plan = doc.find("/plan")) {
    if (!plan->is_array()) doc.fail("/plan", "plan must be an array");
    for (size_t i = 0; i < plan->size(); ++i) {
      auto p = "/plan/" + std::to_string(i);
      if (!(*plan)[i].is_string() || !kPlanSteps.count((*plan)[i].get<std::string>()))
        doc.fail(p, "plan steps are dns, tcpip, http, classify, evade, metrics");
      cfg.plan.insert((*plan)[i].get<std::string>());
    }
  }
  cfg.name = cfg.doc.value("name", dir.filename().string());
  cfg.config_digest = sha256_hex(text + std::string(1, '\0') + topo_text + std::string(1, '\0') + pbw_text);
  return cfg;
}

json provenance(const CampaignConfig& cfg) {
  return json{{"campaign", cfg.name},
              {"seed", cfg.seed},
              {"config_sha256", cfg.config_digest},
              {"toolkit_version", kToolkitVersion}};
}

namespace {

uint64_t splitmix(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Chunks are fixed by the item list, never by --jobs, so results do not
// depend on the thread count.
uint64_t chunk_seed(uint64_t seed, const std::string& scan, size_t chunk) {
  uint64_t h = seed;
  for (char c : scan) h = splitmix(h ^ static_cast<unsigned char>(c));
  return splitmix(h ^ (chunk + 1));
}

struct Context {
  const CampaignConfig& cfg;
  const RunOptions& opts;
  netsim::Topology topo;
  std::string text;  // campaign text, for locating errors
  Doc doc;

  Context(const CampaignConfig& c, const RunOptions& o)
      : cfg(c), opts(o), topo(netsim::build_topology(c.topology)), text(c.campaign_text), doc(cfg.doc, text, c.campaign_file) {}

  netsim::Network network(const std::string& scan, size_t chunk) const {
    return netsim::Network(topo, chunk_seed(cfg.seed, scan, chunk));
  }

  Ipv4Addr addr(const std::string& pointer) const {
    auto s = doc.string(pointer);
    auto a = Ipv4Addr::parse(s);
    if (!a) doc.fail(pointer, "'" + s + "' is not an IPv4 address");
    return *a;
  }

  std::vector<std::string> strings(const std::string& pointer) const {
    std::vector<std::string> out;
    const auto& v = doc.require(pointer);
    if (!v.is_array()) doc.fail(pointer, "expected an array of strings");
    for (size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_string()) doc.fail(pointer + "/" + std::to_string(i), "expected a string");
      out.push_back(v[i].get<std::string>());
    }
    return out;
  }

  std::vector<std::string> domains_or_pbw(const std::string& block) const {
    if (doc.find("/" + block + "/domains")) return strings("/" + block + "/domains");
    return cfg.pbw;
  }

  int integer(const std::string& pointer, int fallback) const {
    auto* v = doc.find(pointer);
    if (!v) return fallback;
    if (!v->is_number_integer()) doc.fail(pointer, "expected an integer");
    return v->get<int>();
  }

  bool boolean(const std::string& pointer, bool fallback) const {
    auto* v = doc.find(pointer);
    if (!v) return fallback;
    if (!v->is_boolean()) doc.fail(pointer, "expected true or false");
    return v->get<bool>();
  }

  void require_block(const std::string& block) const {
    if (!doc.find("/" + block)) doc.fail("/" + block, "campaign has no '" + block + "' section");
  }
};

void write_text(ScanOutcome& out, const fs::path& dir, const std::string& name, const std::string& content) {
  fs::create_directories(dir);
  auto p = dir / name;
  std::ofstream f(p, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + p.string());
  f << content;
  out.written.push_back(p);
}

void write_json(ScanOutcome& out, const fs::path& dir, const std::string& name, const json& j) {
  write_text(out, dir, name, j.dump(2) + "\n");
}

json error_entry(const std::string& item, const std::exception& e) { return json{{"item", item}, {"error", e.what()}}; }

template <typename T>
std::vector<std::vector<T>> split(const std::vector<T>& items, size_t size) {
  std::vector<std::vector<T>> out;
  for (size_t i = 0; i < items.size(); i += size)
    out.emplace_back(items.begin() + static_cast<std::ptrdiff_t>(i),
                     items.begin() + static_cast<std::ptrdiff_t>(std::min(items.size(), i + size)));
  return out;
}

std::vector<Prefix> client_prefixes(const Context& c) {
  const auto& node = c.topo.node(c.cfg.client);
  auto it = c.topo.config().as_prefixes.find(node.as_label);
  return it == c.topo.config().as_prefixes.end() ? std::vector<Prefix>{} : it->second;
}

std::vector<std::string> screen_censored(netsim::Network& net, const std::string& client, Ipv4Addr server,
                                         const std::vector<std::string>& domains, std::vector<std::string>* open) {
  std::vector<std::string> out;
  for (const auto& d : domains) {
    auto r = http_detect::fetch_direct(net, client, d, server);
    if (r.censor_reply) out.push_back(d);
    else if (open && r.connected) open->push_back(d);
  }
  return out;
}

// ---------------------------------------------------------------------------

ScanOutcome scan_dns(Context& c) {
  ScanOutcome out{"dns", 0, {}};
  c.require_block("dns");
  std::vector<Ipv4Addr> candidates;
  if (c.doc.find("/dns/resolver_ranges")) {
    auto ranges = c.strings("/dns/resolver_ranges");
    for (size_t i = 0; i < ranges.size(); ++i) {
      try {
        for (auto a : dns_detect::expand(Prefix::from_string(ranges[i]))) candidates.push_back(a);
      } catch (const std::invalid_argument&) {
        c.doc.fail("/dns/resolver_ranges/" + std::to_string(i), "'" + ranges[i] + "' is not a prefix");
      }
    }
  } else {
    auto list = c.strings("/dns/resolvers");
    for (size_t i = 0; i < list.size(); ++i) candidates.push_back(c.addr("/dns/resolvers/" + std::to_string(i)));
  }
  std::vector<Ipv4Addr> resolvers = candidates;
  if (c.doc.find("/dns/probe_domain")) {
    auto net = c.network("dns-discovery", 0);
    resolvers = dns_detect::discover_resolvers(net, c.cfg.client, candidates, c.doc.string("/dns/probe_domain"),
                                               c.addr("/dns/known_answer"));
  }
  dns_detect::ScreeningContext ctx;
  ctx.client_as_prefixes = client_prefixes(c);
  if (c.doc.find("/dns/whitelist")) {
    auto wl = c.strings("/dns/whitelist");
    for (size_t i = 0; i < wl.size(); ++i) ctx.shared_hosting_whitelist.insert(c.addr("/dns/whitelist/" + std::to_string(i)));
  }
  bool mechanism = c.boolean("/dns/mechanism", true);

  struct Chunk {
    std::map<Ipv4Addr, std::set<std::string>> censorious;
    std::vector<dns_detect::DnsVerdict> verdicts;
    std::map<Ipv4Addr, std::string> mechanisms;
    json errors = json::array();
  };
  auto parts = split(resolvers, 16);
  auto chunks = run_chunks<Chunk>(parts.size(), c.opts.jobs, [&](size_t i) {
    Chunk ch;
    auto net = c.network("dns", i);
    net.set_recording(false);
    for (auto r : parts[i]) {
      try {
        std::vector<dns_detect::DnsVerdict> vs;
        auto found = dns_detect::find_censorious_resolvers(net, c.cfg.client, {r}, c.cfg.pbw, ctx, &vs);
        ch.verdicts.insert(ch.verdicts.end(), vs.begin(), vs.end());
        for (auto& [addr, set] : found) {
          ch.censorious[addr] = set;
          if (!mechanism) continue;
          tracer::ProbeSpec spec;
          spec.kind = tracer::DnsQuery{*set.begin()};
          spec.dst = addr;
          int hops = net.topology().hop_count(c.cfg.client, addr);
          spec.ttl_max = std::min(64, hops + 2);
          auto trace = tracer::iterative_trace(net, c.cfg.client, spec);
          ch.mechanisms[addr] = tracer::to_string(tracer::classify_dns_mechanism(trace, hops));
        }
      } catch (const std::exception& e) {
        ch.errors.push_back(error_entry(r.str(), e));
      }
    }
    return ch;
  });

  std::map<Ipv4Addr, std::set<std::string>> censorious;
  std::vector<dns_detect::DnsVerdict> verdicts;
  std::map<Ipv4Addr, std::string> mechanisms;
  json errors = json::array();
  for (auto& ch : chunks) {
    censorious.insert(ch.censorious.begin(), ch.censorious.end());
    verdicts.insert(verdicts.end(), ch.verdicts.begin(), ch.verdicts.end());
    mechanisms.insert(ch.mechanisms.begin(), ch.mechanisms.end());
    for (auto& e : ch.errors) errors.push_back(e);
  }
  out.failures = static_cast<int>(errors.size());

  json j;
  j["scan"] = "dns";
  j["provenance"] = provenance(c.cfg);
  j["resolvers_probed"] = candidates.size();
  j["resolvers_discovered"] = resolvers.size();
  json cens = json::object();
  for (const auto& [a, set] : censorious) cens[a.str()] = set;
  j["censorious"] = cens;
  std::string tsv;
  if (!resolvers.empty()) {
    std::set<std::string> total, poisoned;
    for (auto r : resolvers) total.insert(r.str());
    std::map<std::string, std::set<std::string>> blocking;
    for (const auto& [a, set] : censorious) {
      poisoned.insert(a.str());
      blocking[a.str()] = set;
    }
    auto cov = metrics::coverage(poisoned, total, metrics::Scope::DnsResolvers);
    if (auto* ref = c.doc.find("/dns/reference_coverage"); ref && ref->is_number()) cov.reference = ref->get<double>();
    j["coverage"] = metrics::to_json(cov);
    if (!poisoned.empty()) {
      auto cons = metrics::consistency(blocking, poisoned);
      j["consistency"] = metrics::to_json(cons);
      tsv = metrics::consistency_tsv(cons);
    }
  }
  if (mechanism) {
    json mech = json::object();
    std::map<std::string, int> counts;
    for (const auto& [a, m] : mechanisms) {
      mech[a.str()] = m;
      ++counts[m];
    }
    j["mechanisms"] = mech;
    j["mechanism_counts"] = counts;
  }
  j["errors"] = errors;
  write_json(out, c.opts.out, "dns.json", j);
  write_text(out, c.opts.out, "dns_verdicts.csv", dns_detect::verdicts_to_csv(verdicts));
  if (!tsv.empty()) write_text(out, c.opts.out, "dns_consistency.tsv", tsv);

  std::ostringstream s;
  s << "DNS scan: " << resolvers.size() << " resolvers found in " << candidates.size() << " probed addresses\n";
  s << "censorious resolvers: " << censorious.size() << "\n";
  if (j.contains("coverage")) s << "coverage: " << j["coverage"]["coverage"]["value"].get<std::string>() << "\n";
  if (j.contains("consistency"))
    s << "consistency: " << j["consistency"]["consistency"]["value"].get<std::string>() << "\n";
  if (j["coverage"].contains("reference_coverage"))
    s << "reference coverage: " << j["coverage"]["reference_coverage"].get<double>() << "\n";
  if (j.contains("mechanism_counts"))
    for (const auto& [m, n] : j["mechanism_counts"].items()) s << m << ": " << n.get<int>() << "\n";
  s << "errors: " << errors.size() << "\n";
  write_text(out, c.opts.out, "dns_summary.txt", s.str());
  return out;
}

// ---------------------------------------------------------------------------

json ooni_json(const http_detect::OoniComparison& o) {
  return json{{"body_length_match", o.body_length_match},
              {"headers_match", o.headers_match},
              {"title_match", o.title_match ? json(*o.title_match) : json(nullptr)},
              {"blocked", o.blocked}};
}

ScanOutcome scan_http(Context& c) {
  ScanOutcome out{"http", 0, {}};
  c.require_block("http");
  auto server = c.addr("/http/server");
  auto domains = c.domains_or_pbw("http");
  bool ooni = c.boolean("/http/ooni_baseline", false);
  json j;
  j["scan"] = "http";
  j["provenance"] = provenance(c.cfg);
  json errors = json::array();
  if (c.cfg.plan.count("tcpip")) {
    auto net = c.network("tcpip", 0);
    try {
      j["transport"] = http_detect::to_string(http_detect::detect_transport_filtering(net, c.cfg.client, server));
    } catch (const std::exception& e) {
      j["transport"] = nullptr;
      errors.push_back(error_entry("tcpip " + server.str(), e));
    }
  }

  struct Item {
    std::optional<http_detect::DiffVerdict> verdict;
    json row;
    std::optional<bool> ooni_blocked;
    std::optional<json> error;
  };
  auto parts = split(domains, 10);
  auto chunks = run_chunks<std::vector<Item>>(parts.size(), c.opts.jobs, [&](size_t i) {
    std::vector<Item> items;
    auto net = c.network("http", i);
    net.set_recording(false);
    for (const auto& d : parts[i]) {
      Item it;
      try {
        auto direct = http_detect::fetch_direct(net, c.cfg.client, d, server);
        auto clean = http_detect::fetch_clean(net, d, server);
        if (!clean) throw http_detect::SiteDown(d + " is not served by " + server.str());
        auto body = direct.response ? direct.response->body : std::string();
        it.verdict = http_detect::classify_http(d, body, clean->body);
        it.row = http_detect::to_json(*it.verdict);
        it.row["censor_reply"] = direct.censor_reply;
        if (ooni) {
          HttpResponse none;
          none.status = 0;
          auto cmp = http_detect::ooni_compare(direct.response ? *direct.response : none, *clean);
          it.row["ooni"] = ooni_json(cmp);
          it.ooni_blocked = cmp.blocked;
        }
      } catch (const std::exception& e) {
        it.error = error_entry(d, e);
      }
      items.push_back(std::move(it));
    }
    return items;
  });

  json rows = json::array();
  std::vector<http_detect::DiffVerdict> verdicts;
  std::map<std::string, int> counts;
  std::set<std::string> confirmed, review, ooni_flagged;
  for (auto& ch : chunks) {
    for (auto& it : ch) {
      if (it.error) {
        errors.push_back(*it.error);
        continue;
      }
      rows.push_back(it.row);
      verdicts.push_back(*it.verdict);
      ++counts[http_detect::to_string(it.verdict->status)];
      if (it.verdict->status == http_detect::DiffStatus::ConfirmedBlocked) confirmed.insert(it.verdict->domain);
      if (it.verdict->status == http_detect::DiffStatus::NeedsReview) review.insert(it.verdict->domain);
      if (it.ooni_blocked && *it.ooni_blocked) ooni_flagged.insert(it.verdict->domain);
    }
  }
  j["server"] = server.str();
  j["counts"] = counts;
  j["verdicts"] = rows;
  if (auto* truth = c.doc.find("/truth/censored")) {
    std::set<std::string> t;
    for (const auto& d : *truth) t.insert(d.get<std::string>());
    std::set<std::string> all;
    for (const auto& v : verdicts) all.insert(v.domain);
    auto count_if = [&](const std::set<std::string>& s, bool want_in_truth) {
      int n = 0;
      for (const auto& d : s) n += (t.count(d) > 0) == want_in_truth;
      return n;
    };
    json v;
    v["confirmed_false_positives"] = count_if(confirmed, false);
    int missed = 0;
    for (const auto& d : t) missed += all.count(d) && !confirmed.count(d);
    v["missed_censored"] = missed;
    v["needs_review"] = review.size();
    if (ooni) {
      v["ooni_false_positives"] = count_if(ooni_flagged, false);
      int fn = 0;
      for (const auto& d : t) fn += all.count(d) && !ooni_flagged.count(d);
      v["ooni_false_negatives"] = fn;
    }
    j["validation"] = v;
  }
  j["errors"] = errors;
  out.failures = static_cast<int>(errors.size());
  write_json(out, c.opts.out, "http.json", j);
  write_text(out, c.opts.out, "review_queue.txt", http_detect::review_queue_text(verdicts));
  std::ostringstream s;
  s << "HTTP scan against " << server.str() << ": " << verdicts.size() << " domains\n";
  if (j.contains("transport") && !j["transport"].is_null()) s << "transport: " << j["transport"].get<std::string>() << "\n";
  for (const auto& [k, n] : counts) s << k << ": " << n << "\n";
  if (j.contains("validation"))
    for (const auto& [k, v] : j["validation"].items()) s << k << ": " << v.dump() << "\n";
  s << "errors: " << errors.size() << "\n";
  write_text(out, c.opts.out, "http_summary.txt", s.str());
  return out;
}

// ---------------------------------------------------------------------------

ScanOutcome scan_trace(Context& c) {
  ScanOutcome out{"trace", 0, {}};
  c.require_block("trace");
  auto kind = c.doc.string("/trace/kind");
  auto domain = c.doc.string("/trace/domain");
  auto dst = c.addr("/trace/dst");
  tracer::ProbeSpec spec;
  spec.dst = dst;
  if (kind == "http") spec.kind = tracer::HttpGet{make_get(domain)};
  else if (kind == "dns") spec.kind = tracer::DnsQuery{domain};
  else c.doc.fail("/trace/kind", "kind must be http or dns");
  spec.exhaustive = c.boolean("/trace/exhaustive", false);
  spec.ttl_max = c.integer("/trace/ttl_max", 32);
  auto net = c.network("trace", 0);
  json j;
  j["scan"] = "trace";
  j["provenance"] = provenance(c.cfg);
  j["kind"] = kind;
  j["domain"] = domain;
  j["dst"] = dst.str();
  json errors = json::array();
  try {
    auto trace = tracer::iterative_trace(net, c.cfg.client, spec);
    json recs = json::array();
    std::istringstream lines(tracer::trace_to_jsonl(trace));
    for (std::string line; std::getline(lines, line);) recs.push_back(json::parse(line));
    j["records"] = recs;
    int hops = net.topology().hop_count(c.cfg.client, dst);
    j["path_length"] = hops;
    if (kind == "http") {
      auto loc = tracer::locate_middlebox(trace, net.topology().traceroute(c.cfg.client, dst));
      j["location"] = loc ? json{{"hop", loc->hop},
                                 {"addr", loc->addr ? json(loc->addr->str()) : json("anonymized")},
                                 {"as", loc->as_label}}
                          : json(nullptr);
    } else {
      bool manipulated = false;
      for (const auto& r : trace.records) manipulated = manipulated || r.kind == tracer::RecordKind::ManipulatedDnsAnswer;
      j["mechanism"] = manipulated ? json(tracer::to_string(tracer::classify_dns_mechanism(trace, hops))) : json(nullptr);
    }
    write_text(out, c.opts.out, "trace.jsonl", tracer::trace_to_jsonl(trace));
    write_text(out, c.opts.out, "trace.txt", tracer::render_trace_table(trace));
  } catch (const std::exception& e) {
    errors.push_back(error_entry(domain, e));
  }
  j["errors"] = errors;
  out.failures = static_cast<int>(errors.size());
  write_json(out, c.opts.out, "trace.json", j);
  return out;
}

// ---------------------------------------------------------------------------

ScanOutcome scan_classify(Context& c) {
  ScanOutcome out{"classify", 0, {}};
  c.require_block("classify");
  auto server = c.addr("/classify/server");
  auto domains = c.domains_or_pbw("classify");
  int trials = c.integer("/classify/trials", 20);
  bool probe_state = c.boolean("/classify/probe_state", true);
  int max_domains = c.integer("/classify/max_domains", 0);

  auto net0 = c.network("classify-screen", 0);
  net0.set_recording(false);
  std::vector<std::string> open;
  auto censored = screen_censored(net0, c.cfg.client, server, domains, &open);
  if (max_domains > 0 && censored.size() > static_cast<size_t>(max_domains)) censored.resize(static_cast<size_t>(max_domains));
  std::string allowed = c.doc.find("/classify/allowed_domain") ? c.doc.string("/classify/allowed_domain")
                        : open.empty()                            ? std::string("example.org")
                                                                  : open.front();

  struct Item {
    json row;
    std::optional<http_detect::Evidence> evidence;
    bool failed{false};
  };
  auto items = run_chunks<Item>(censored.size(), c.opts.jobs, [&](size_t i) {
    Item it;
    const auto& d = censored[i];
    it.row["domain"] = d;
    auto net = c.network("classify", i);
    net.set_recording(false);
    try {
      auto ev = http_detect::collect_evidence(net, c.cfg.client, d, server, trials, probe_state);
      try {
        it.row["class"] = http_detect::to_json(http_detect::classify_middlebox(ev));
      } catch (const http_detect::Unclassified& e) {
        it.row["class"] = nullptr;
        it.row["unclassified"] = e.what();
        it.row["transcript_packets"] = e.transcript().size();
      }
      try {
        it.row["trigger"] = http_detect::to_string(http_detect::trigger_analysis(net, c.cfg.client, d, server, allowed));
      } catch (const http_detect::InconsistentCensorship& e) {
        it.row["trigger"] = nullptr;
        it.row["trigger_note"] = e.what();
      }
      it.evidence = std::move(ev);
    } catch (const std::exception& e) {
      it.row["error"] = e.what();
      it.failed = true;
    }
    return it;
  });

  json j;
  j["scan"] = "classify";
  j["provenance"] = provenance(c.cfg);
  j["server"] = server.str();
  j["censored_domains"] = censored;
  json rows = json::array(), errors = json::array();
  std::vector<http_detect::Evidence> evidence;
  for (auto& it : items) {
    if (it.failed) errors.push_back(json{{"item", it.row["domain"]}, {"error", it.row["error"]}});
    else rows.push_back(it.row);
    if (it.evidence) evidence.push_back(std::move(*it.evidence));
  }
  j["middleboxes"] = rows;
  if (auto* col = c.doc.find("/classify/collateral")) {
    (void)col;
    auto victim = c.doc.string("/classify/collateral/victim_as");
    j["collateral"] = metrics::to_json(metrics::attribute_collateral(victim, evidence));
  }
  j["errors"] = errors;
  out.failures = static_cast<int>(errors.size());
  write_json(out, c.opts.out, "classify.json", j);

  std::ostringstream s;
  s << "classified " << rows.size() << " of " << censored.size() << " censored domains via " << server.str() << "\n";
  for (const auto& r : rows) {
    s << r["domain"].get<std::string>() << ": ";
    if (r["class"].is_null()) {
      s << "unclassified";
    } else {
      const auto& k = r["class"];
      s << k["kind"].get<std::string>() << " " << k["visibility"].get<std::string>();
      if (!k["fixed_ip_id"].is_null()) s << " ip_id=" << k["fixed_ip_id"].get<int>();
      if (!k["port_scope"].is_null()) s << " " << k["port_scope"].get<std::string>();
      if (!k["location"].is_null()) s << " hop=" << k["location"]["hop"].get<int>();
    }
    if (r.contains("trigger") && !r["trigger"].is_null()) s << " trigger=" << r["trigger"].get<std::string>();
    s << "\n";
  }
  if (j.contains("collateral"))
    for (const auto& [as, n] : j["collateral"]["by_as"].items()) s << "collateral " << as << ": " << n.get<int>() << "\n";
  s << "errors: " << errors.size() << "\n";
  write_text(out, c.opts.out, "classify_summary.txt", s.str());
  return out;
}

// ---------------------------------------------------------------------------

ScanOutcome scan_evade(Context& c) {
  ScanOutcome out{"evade", 0, {}};
  c.require_block("evade");
  std::string type = c.doc.find("/evade/type") ? c.doc.string("/evade/type") : "http";
  if (type != "http" && type != "dns") c.doc.fail("/evade/type", "type must be http or dns");
  evasion::CatalogParams params;
  if (c.doc.find("/evade/allowed_domain")) params.allowed_domain = c.doc.string("/evade/allowed_domain");
  if (c.doc.find("/evade/alt_resolver")) params.alt_resolver = c.addr("/evade/alt_resolver");
  int max_domains = c.integer("/evade/max_domains", 0);

  std::vector<evasion::Target> targets;
  if (type == "http") {
    auto server = c.addr("/evade/server");
    std::vector<std::string> domains;
    if (c.doc.find("/evade/domains")) {
      domains = c.strings("/evade/domains");
    } else {
      auto net0 = c.network("evade-screen", 0);
      net0.set_recording(false);
      domains = screen_censored(net0, c.cfg.client, server, c.cfg.pbw, nullptr);
    }
    if (max_domains > 0 && domains.size() > static_cast<size_t>(max_domains)) domains.resize(static_cast<size_t>(max_domains));
    for (const auto& d : domains) targets.push_back(evasion::Target{d, evasion::CensorshipType::Http, server, std::nullopt});
  } else {
    auto resolver = c.addr("/evade/resolver");
    if (!params.alt_resolver) c.doc.fail("/evade", "DNS evasion needs alt_resolver");
    auto net0 = c.network("evade-screen", 0);
    for (const auto& d : c.strings("/evade/domains")) {
      auto clean = net0.clean_resolve(d);
      targets.push_back(evasion::Target{d, evasion::CensorshipType::Dns, clean.empty() ? Ipv4Addr{} : clean.front(), resolver});
    }
  }
  auto catalog = evasion::full_catalog(params);
  auto results = run_chunks<std::vector<evasion::StrategyOutcome>>(targets.size(), c.opts.jobs, [&](size_t i) {
    auto net = c.network("evade", i);
    net.set_recording(false);
    return evasion::evaluate_catalog(net, c.cfg.client, targets[i], catalog);
  });

  json j;
  j["scan"] = "evade";
  j["provenance"] = provenance(c.cfg);
  j["type"] = type;
  json per = json::object();
  std::ostringstream m;
  m << "domain";
  for (const auto& s : catalog) m << "\t" << evasion::strategy_name(s);
  m << "\n";
  int errors = 0;
  for (size_t i = 0; i < targets.size(); ++i) {
    json arr = json::array();
    m << targets[i].domain;
    for (const auto& o : results[i]) {
      arr.push_back(evasion::to_json(o));
      m << "\t" << evasion::to_string(o.status);
      errors += o.status == evasion::OutcomeStatus::Error;
    }
    m << "\n";
    per[targets[i].domain] = arr;
  }
  j["outcomes"] = per;
  out.failures = errors;
  write_json(out, c.opts.out, "evade.json", j);
  write_text(out, c.opts.out, "evade_matrix.txt", m.str());
  return out;
}

// ---------------------------------------------------------------------------

std::optional<json> read_json_if(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return json::parse(ss.str());
  } catch (const json::parse_error&) {
    return std::nullopt;
  }
}

ScanOutcome scan_metrics(Context& c) {
  ScanOutcome out{"metrics", 0, {}};
  json j;
  j["scan"] = "metrics";
  j["provenance"] = provenance(c.cfg);
  json errors = json::array();
  json coverage = json::array();

  if (c.doc.find("/coverage/internal")) {
    auto net = c.network("coverage-internal", 0);
    net.set_recording(false);
    std::vector<Ipv4Addr> targets;
    if (c.doc.find("/coverage/internal/targets")) {
      auto list = c.strings("/coverage/internal/targets");
      for (size_t i = 0; i < list.size(); ++i) targets.push_back(c.addr("/coverage/internal/targets/" + std::to_string(i)));
    } else {
      auto prefixes = c.strings("/coverage/internal/target_prefixes");
      for (const auto& p : prefixes)
        for (auto a : dns_detect::expand(Prefix::from_string(p)))
          if (net.clean_handshake(a, 80)) targets.push_back(a);
    }
    try {
      coverage.push_back(metrics::to_json(metrics::http_coverage_internal(net, c.cfg.client, targets, c.cfg.pbw)));
    } catch (const std::exception& e) {
      errors.push_back(error_entry("coverage/internal", e));
    }
  }
  if (c.doc.find("/coverage/external")) {
    auto net = c.network("coverage-external", 0);
    net.set_recording(false);
    auto vantages = c.strings("/coverage/external/vantages");
    std::vector<Prefix> prefixes;
    for (const auto& p : c.strings("/coverage/external/prefixes")) prefixes.push_back(Prefix::from_string(p));
    try {
      coverage.push_back(metrics::to_json(metrics::http_coverage_external(net, vantages, prefixes, c.cfg.pbw, c.cfg.seed)));
    } catch (const std::exception& e) {
      errors.push_back(error_entry("coverage/external", e));
    }
  }
  if (auto dns = read_json_if(c.opts.out / "dns.json")) {
    if (dns->contains("coverage")) coverage.push_back((*dns)["coverage"]);
    if (dns->contains("consistency")) j["dns_consistency"] = (*dns)["consistency"]["consistency"];
  }
  j["coverage"] = coverage;
  if (auto* truth = c.doc.find("/truth/censored")) {
    if (auto http = read_json_if(c.opts.out / "http.json")) {
      std::set<std::string> reported, t;
      for (const auto& v : (*http)["verdicts"])
        if (v["status"] == "ConfirmedBlocked") reported.insert(v["domain"].get<std::string>());
      for (const auto& d : *truth) t.insert(d.get<std::string>());
      try {
        j["precision_recall"] = metrics::to_json(metrics::precision_recall(reported, t));
      } catch (const std::exception& e) {
        errors.push_back(error_entry("precision_recall", e));
      }
    }
  }
  j["errors"] = errors;
  out.failures = static_cast<int>(errors.size());
  write_json(out, c.opts.out, "metrics.json", j);
  std::ostringstream s;
  for (const auto& cv : coverage)
    s << cv["scope"].get<std::string>() << " coverage: " << cv["coverage"]["value"].get<std::string>() << " ("
      << cv["poisoned"].get<int64_t>() << "/" << cv["total"].get<int64_t>() << ")\n";
  if (j.contains("dns_consistency")) s << "DNS consistency: " << j["dns_consistency"]["value"].get<std::string>() << "\n";
  if (j.contains("precision_recall"))
    s << "precision: " << j["precision_recall"]["precision"]["value"].get<std::string>()
      << " recall: " << j["precision_recall"]["recall"]["value"].get<std::string>() << "\n";
  s << "errors: " << errors.size() << "\n";
  write_text(out, c.opts.out, "metrics_summary.txt", s.str());
  return out;
}

}  // namespace

ScanOutcome run_scan(const std::string& scan, const CampaignConfig& cfg, const RunOptions& opts) {
  Context c(cfg, opts);
  if (scan == "dns") return scan_dns(c);
  if (scan == "http") return scan_http(c);
  if (scan == "trace") return scan_trace(c);
  if (scan == "classify") return scan_classify(c);
  if (scan == "evade") return scan_evade(c);
  if (scan == "metrics") return scan_metrics(c);
  throw std::invalid_argument("unknown scan '" + scan + "'");
}

std::vector<ScanOutcome> run_plan(const CampaignConfig& cfg, const RunOptions& opts) {
  std::vector<ScanOutcome> out;
  for (const char* step : {"dns", "http", "classify", "evade", "metrics"}) {
    bool wanted = cfg.plan.count(step) || (std::string(step) == "http" && cfg.plan.count("tcpip"));
    if (wanted) out.push_back(run_scan(step, cfg, opts));
  }
  if (cfg.doc.contains("trace")) out.push_back(run_scan("trace", cfg, opts));
  out.push_back(merge_report(opts.out));
  return out;
}

ScanOutcome merge_report(const fs::path& dir) {
  ScanOutcome out{"report", 0, {}};
  json sections = json::object();
  json prov = nullptr;
  for (const char* name : {"dns", "http", "trace", "classify", "evade", "metrics"}) {
    auto doc = read_json_if(dir / (std::string(name) + ".json"));
    if (!doc) continue;
    if (prov.is_null() && doc->contains("provenance")) prov = (*doc)["provenance"];
    doc->erase("provenance");
    sections[name] = *doc;
  }
  if (sections.empty()) throw UsageError("nothing to merge");
  json j;
  j["provenance"] = prov;
  j["sections"] = sections;
  write_json(out, dir, "report.json", j);

  std::string cov = "scope\tpoisoned\ttotal\tcoverage\n";
  auto add_cov = [&](const json& cv) {
    cov += cv["scope"].get<std::string>() + "\t" + std::to_string(cv["poisoned"].get<int64_t>()) + "\t" +
           std::to_string(cv["total"].get<int64_t>()) + "\t" + cv["coverage"]["value"].get<std::string>() + "\n";
  };
  if (sections.contains("metrics")) {
    for (const auto& cv : sections["metrics"]["coverage"]) add_cov(cv);
  } else if (sections.contains("dns") && sections["dns"].contains("coverage")) {
    add_cov(sections["dns"]["coverage"]);
  }
  write_text(out, dir, "coverage_plot.tsv", cov);
  std::ifstream tsv(dir / "dns_consistency.tsv", std::ios::binary);
  if (tsv) {
    std::ostringstream ss;
    ss << tsv.rdbuf();
    write_text(out, dir, "consistency_plot.tsv", ss.str());
  }
  return out;
}

}  // namespace censorlab::campaign
