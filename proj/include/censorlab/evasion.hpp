#ifndef CENSORLAB_EVASION_HPP
#define CENSORLAB_EVASION_HPP

#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "censorlab/http.hpp"
#include "censorlab/http_detect.hpp"
#include "censorlab/json_io.hpp"
#include "censorlab/netsim.hpp"

namespace censorlab::evasion {

class Inapplicable : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Client-side drop of server FIN/RST packets, optionally only those with a
/// given IP-ID.
struct DropFinRst {
  std::optional<uint16_t> ip_id;
};
struct AltResolver {
  Ipv4Addr addr;
};

using Strategy = std::variant<variant::KeywordCase, DropFinRst, variant::HostWhitespace, variant::DoubleHost,
                              variant::Fragmented, AltResolver>;

std::string strategy_name(const Strategy& s);
/// Inverse of strategy_name: "keyword-case:HOST", "drop-fin-rst[:ID]",
/// "whitespace:B:A[:tabs]", "double-host:D", "fragmented[:O,...]", "alt-resolver:ADDR".
Strategy parse_strategy(std::string_view text);

enum class CensorshipType { Http, Dns };

struct Target {
  std::string domain;
  CensorshipType type{CensorshipType::Http};
  Ipv4Addr server;                  // Http: the blocked site's address
  std::optional<Ipv4Addr> resolver;  // Dns: the poisoned resolver in use
};

enum class OutcomeStatus { Bypassed, Blocked, NotCensored, Inapplicable, Error };
std::string to_string(OutcomeStatus s);

struct StrategyOutcome {
  Strategy strategy;
  OutcomeStatus status{OutcomeStatus::Blocked};
  bool bypassed{false};
  std::optional<std::string> content_digest;
  std::vector<std::string> side_effects;
  std::vector<Packet> filtered;  // packets a DropFinRst filter discarded
  std::string error;
};

/// Runs one modified flow. bypassed is set only when the delivered body
/// hashes to the clean-vantage digest. Throws Inapplicable when the strategy
/// does not address `target.type`.
StrategyOutcome apply(netsim::Network& net, const std::string& client, const Target& target, const Strategy& s);

/// Each strategy on a fresh flow, in input order. When a canonical probe
/// shows no censorship every outcome is NotCensored.
std::vector<StrategyOutcome> evaluate_catalog(netsim::Network& net, const std::string& client, const Target& target,
                                              const std::vector<Strategy>& strategies);

struct CatalogParams {
  std::string allowed_domain{"example.org"};
  std::optional<Ipv4Addr> alt_resolver;
};

std::vector<Strategy> full_catalog(const CatalogParams& p);
/// Ranked remedies for a classified middlebox; nullopt (Unclassified) gives
/// the full catalog.
std::vector<Strategy> recommend(const std::optional<http_detect::MiddleboxClass>& cls, const CatalogParams& p);
std::vector<Strategy> recommend_for_dns(const CatalogParams& p);

json to_json(const StrategyOutcome& o);

}  // namespace censorlab::evasion

#endif  // CENSORLAB_EVASION_HPP
