#ifndef CENSORLAB_DNS_DETECT_HPP
#define CENSORLAB_DNS_DETECT_HPP

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "censorlab/ipv4.hpp"
#include "censorlab/json_io.hpp"
#include "censorlab/netsim.hpp"

namespace censorlab::dns_detect {

enum class Vantage { Direct, Clean };

struct ResolutionRecord {
  std::string domain;
  Vantage vantage{Vantage::Direct};
  std::set<Ipv4Addr> answers;
};

enum class Overlap { Overlapping, Disjoint };

/// Throws std::invalid_argument when the records name different domains.
Overlap overlap_filter(const ResolutionRecord& direct, const ResolutionRecord& clean);

/// Addresses given for two or more distinct domains, minus whitelisted
/// shared-hosting addresses.
std::map<Ipv4Addr, std::set<std::string>> frequency_analysis(const std::vector<ResolutionRecord>& direct,
                                                             const std::set<Ipv4Addr>& shared_hosting_whitelist);

const std::vector<Prefix>& bogon_prefixes();
bool is_bogon(Ipv4Addr ip);

bool same_as_heuristic(Ipv4Addr ip, const std::vector<Prefix>& client_as_prefixes);

enum class Status { Uncensored, Censored, Unresolved };
enum class Reason { None, SameAs, Bogon, FrequencyCluster };
std::string to_string(Status s);
std::string to_string(Reason r);

struct DnsVerdict {
  std::string domain;
  Status status{Status::Unresolved};
  Reason reason{Reason::None};
  Ipv4Addr resolver;
  std::set<Ipv4Addr> answers;
};

struct ScreeningContext {
  std::vector<Prefix> client_as_prefixes;
  std::set<Ipv4Addr> shared_hosting_whitelist;
};

/// Direct resolution through `resolver`; nullopt when nothing answered or
/// the answer was empty.
std::optional<ResolutionRecord> resolve_direct(netsim::Network& net, const std::string& client, Ipv4Addr resolver,
                                               const std::string& domain);
ResolutionRecord resolve_clean(const netsim::Network& net, const std::string& domain);

/// Full pipeline for one resolver: overlap filter, then same-AS, bogon and
/// frequency-cluster heuristics. Non-clustered leftovers are confirmed by
/// fetching through the clean vantage from every answered address.
std::vector<DnsVerdict> screen_domains(netsim::Network& net, const std::string& client, Ipv4Addr resolver,
                                       const std::vector<std::string>& domains, const ScreeningContext& ctx);

/// Addresses in `range` that answer `probe_domain` with `known_answer`.
std::vector<Ipv4Addr> discover_resolvers(netsim::Network& net, const std::string& client, const std::vector<Ipv4Addr>& range,
                                         const std::string& probe_domain, Ipv4Addr known_answer);
std::vector<Ipv4Addr> expand(const Prefix& p);

/// Resolvers that gave at least one manipulated answer, with their blocked sets.
std::map<Ipv4Addr, std::set<std::string>> find_censorious_resolvers(netsim::Network& net, const std::string& client,
                                                                    const std::vector<Ipv4Addr>& resolvers,
                                                                    const std::vector<std::string>& pbw_list,
                                                                    const ScreeningContext& ctx,
                                                                    std::vector<DnsVerdict>* verdicts = nullptr);

json verdicts_to_json(const std::vector<DnsVerdict>& v);
/// CSV with header "domain,resolver,status,reason".
std::string verdicts_to_csv(const std::vector<DnsVerdict>& v);

}  // namespace censorlab::dns_detect

#endif  // CENSORLAB_DNS_DETECT_HPP
