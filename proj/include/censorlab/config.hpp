#ifndef CENSORLAB_CONFIG_HPP
#define CENSORLAB_CONFIG_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "censorlab/http.hpp"
#include "censorlab/ipv4.hpp"
#include "censorlab/wire.hpp"

namespace censorlab::netsim {

/// Raised for invalid configuration. `pointer` is a JSON pointer to the
/// offending value when the error came from a document.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& msg, std::string pointer = {})
      : std::runtime_error(msg), pointer_(std::move(pointer)) {}
  const std::string& pointer() const { return pointer_; }

 private:
  std::string pointer_;
};

enum class MiddleboxKind { IM, WM };
enum class InspectDirection { RequestOnly, ResponseOnly, Both };

struct IpIdPolicy {
  std::optional<uint16_t> fixed;  // nullopt: random per packet
  bool operator==(const IpIdPolicy&) const = default;
};

using HeaderList = std::vector<std::pair<std::string, std::string>>;

struct Notification {
  std::string body_template;  // "{domain}" is replaced with the blocked host
  HeaderList headers;
  uint8_t flags{tcp::kFin | tcp::kPsh | tcp::kAck};
  IpIdPolicy ip_id;
  std::string fingerprint;
  bool operator==(const Notification&) const = default;
};

/// One outcome of a discrete delay distribution.
struct DelayOutcome {
  int64_t ticks{0};
  double weight{1.0};
  bool operator==(const DelayOutcome&) const = default;
};

struct MiddleboxConfig {
  std::string id;
  MiddleboxKind kind{MiddleboxKind::WM};
  std::string attach;  // router id
  std::set<std::string> blocklist;
  std::string blocklist_ref;  // name in TopologyConfig::blocklists, resolved at build time
  MatcherConfig matcher;
  InspectDirection inspect{InspectDirection::RequestOnly};
  bool stateful{true};
  int64_t state_timeout_ticks{150};
  Notification notification;
  bool send_rst_followup{false};
  bool covert{false};
  bool drop_flow_after_trigger{false};
  std::vector<DelayOutcome> injection_delay_ticks{{0, 1.0}};
  /// Match against the concatenated client stream instead of each segment.
  bool reassemble{false};
  /// When non-empty, only flows whose client address falls inside one of
  /// these prefixes are inspected.
  std::vector<Prefix> source_prefixes;
  /// When set, DNS queries for blocklisted names get a forged answer.
  std::optional<Ipv4Addr> dns_forge_answer;

  /// Throws ConfigError when the kind-dependent invariants do not hold.
  void validate() const;
};

struct RouterConfig {
  std::string id;
  Ipv4Addr addr;
  std::string as_label;
  bool anonymized{false};
};

struct ClientConfig {
  std::string id;
  Ipv4Addr addr;
  std::string as_label;
};

struct SiteConfig {
  std::string domain;
  std::optional<std::string> body;       // generated from the domain when absent
  std::optional<std::string> edge_body;  // served on routed (non-clean) fetches
  HeaderList edge_headers;               // extra headers on routed fetches
};

struct WebServerConfig {
  std::string id;
  Ipv4Addr addr;
  std::string as_label;
  std::vector<uint16_t> ports{80};
  bool up{true};
  bool close_after_response{false};
  std::vector<SiteConfig> sites;
};

struct ResolverConfig {
  std::string id;
  Ipv4Addr addr;
  std::string as_label;
  std::map<std::string, std::vector<Ipv4Addr>> honest_map;
  std::map<std::string, Ipv4Addr> poisoned_map;
  /// Fall back to the topology's authoritative records for names not in honest_map.
  bool use_authoritative{true};
};

/// An addressable host that runs no service.
struct HostConfig {
  std::string id;
  Ipv4Addr addr;
  std::string as_label;
};

/// Router-level drop of everything sent to `dst` (or only the first N packets).
struct BlackholeConfig {
  std::string router;
  Ipv4Addr dst;
  std::optional<int> drop_first;
};

struct TopologyConfig {
  std::string name;
  std::vector<RouterConfig> routers;
  std::vector<ClientConfig> clients;
  std::vector<WebServerConfig> web_servers;
  std::vector<ResolverConfig> resolvers;
  std::vector<HostConfig> hosts;
  std::vector<std::pair<std::string, std::string>> links;
  std::vector<MiddleboxConfig> middleboxes;
  std::vector<BlackholeConfig> blackholes;
  std::map<std::string, std::set<std::string>> blocklists;
  std::map<std::string, std::vector<Ipv4Addr>> authoritative_dns;
  std::map<std::string, std::vector<Prefix>> as_prefixes;
  int64_t server_latency_ticks{1};
};

/// Win probability p for the injected packet against a server reply that
/// lands one tick after the request: delay 0 with weight p, 2 otherwise.
std::vector<DelayOutcome> delay_for_win_probability(double p);

/// The four shipped censor archetypes: airtel_wm, jio_wm, idea_im, vodafone_im.
MiddleboxConfig archetype(std::string_view name);
std::vector<std::string> archetype_names();

/// Known block-page fingerprints and the network that serves them.
struct FingerprintEntry {
  std::string fingerprint;
  std::string as_label;
};
const std::vector<FingerprintEntry>& fingerprint_registry();
/// First registry entry whose fingerprint occurs in `body`.
std::optional<FingerprintEntry> match_fingerprint(std::string_view body);

std::string to_string(MiddleboxKind k);
std::string to_string(InspectDirection d);
InspectDirection inspect_from_string(std::string_view s);

}  // namespace censorlab::netsim

#endif  // CENSORLAB_CONFIG_HPP
