#ifndef CENSORLAB_METRICS_HPP
#define CENSORLAB_METRICS_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "censorlab/http_detect.hpp"
#include "censorlab/ipv4.hpp"
#include "censorlab/json_io.hpp"
#include "censorlab/netsim.hpp"

namespace censorlab::metrics {

/// Non-negative exact fraction, always reduced.
struct Fraction {
  int64_t num{0};
  int64_t den{1};

  Fraction() = default;
  Fraction(int64_t n, int64_t d);

  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  /// Three decimals, halves rounded up.
  std::string str3() const;
  std::string exact() const { return std::to_string(num) + "/" + std::to_string(den); }

  bool operator==(const Fraction& o) const { return num == o.num && den == o.den; }
};

json to_json(const Fraction& f);

enum class Scope { DnsResolvers, HttpPathsInternal, HttpPathsExternal };
std::string to_string(Scope s);

struct CoverageReport {
  Scope scope{Scope::DnsResolvers};
  int64_t poisoned_count{0};
  int64_t total_count{0};
  Fraction coverage;
  std::set<std::string> poisoned_units;
  /// Externally reported figure for the same measurement, when one exists.
  std::optional<double> reference;
};

/// Throws std::invalid_argument when `total` is empty or `poisoned` is not a subset.
CoverageReport coverage(const std::set<std::string>& poisoned, const std::set<std::string>& total,
                        Scope scope = Scope::DnsResolvers);
CoverageReport coverage(int64_t poisoned, int64_t total, Scope scope = Scope::DnsResolvers);

struct ConsistencyReport {
  std::map<std::string, Fraction> fractions;  // domain -> share of poisoned units blocking it
  Fraction consistency;
};

/// Throws std::invalid_argument on an empty unit set or a blocking unit
/// outside it.
ConsistencyReport consistency(const std::map<std::string, std::set<std::string>>& blocking,
                              const std::set<std::string>& poisoned_units);
/// "domain_id\tfraction" rows; ids are 1-based in descending-fraction order.
std::string consistency_tsv(const ConsistencyReport& r);

struct PrecisionRecall {
  size_t reported{0};
  size_t ground_truth{0};
  size_t overlap{0};
  Fraction precision;
  Fraction recall;
};
PrecisionRecall precision_recall(const std::set<std::string>& reported, const std::set<std::string>& ground_truth);

/// A path is poisoned when any GET over it draws a censor reply.
CoverageReport http_coverage_internal(netsim::Network& net, const std::string& client,
                                      const std::vector<Ipv4Addr>& targets, const std::vector<std::string>& pbw);
/// Samples up to two port-80 hosts per prefix with `seed` and sweeps every
/// (vantage, host) path.
CoverageReport http_coverage_external(netsim::Network& net, const std::vector<std::string>& vantages,
                                      const std::vector<Prefix>& prefixes, const std::vector<std::string>& pbw,
                                      uint64_t seed);
/// Hosts picked by http_coverage_external for the same arguments.
std::vector<Ipv4Addr> sample_external_hosts(const netsim::Network& net, const std::vector<Prefix>& prefixes,
                                            uint64_t seed);

enum class AttributionRule { VisibleHop, FlankingHops, Fingerprint };
std::string to_string(AttributionRule r);

struct CollateralAttribution {
  std::string victim_as;
  std::map<std::string, int> by_as;
  std::map<std::string, std::pair<std::string, AttributionRule>> per_domain;
  std::set<std::string> unattributed;
};

CollateralAttribution attribute_collateral(const std::string& victim_as,
                                           const std::vector<http_detect::Evidence>& blocked);

json to_json(const CoverageReport& r);
json to_json(const ConsistencyReport& r);
json to_json(const PrecisionRecall& r);
json to_json(const CollateralAttribution& r);

}  // namespace censorlab::metrics

#endif  // CENSORLAB_METRICS_HPP
