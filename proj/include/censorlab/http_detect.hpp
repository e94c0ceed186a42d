#ifndef CENSORLAB_HTTP_DETECT_HPP
#define CENSORLAB_HTTP_DETECT_HPP

#include <array>
#include <functional>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "censorlab/http.hpp"
#include "censorlab/json_io.hpp"
#include "censorlab/netsim.hpp"
#include "censorlab/tracer.hpp"

namespace censorlab::http_detect {

/// Censorship that comes and goes between probes of the same site.
class InconsistentCensorship : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class SiteDown : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class Unsupported : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
/// Evidence does not support a single class. Carries the transcript.
class Unclassified : public std::runtime_error {
 public:
  Unclassified(const std::string& msg, std::vector<Packet> transcript)
      : std::runtime_error(msg), transcript_(std::move(transcript)) {}
  const std::vector<Packet>& transcript() const { return transcript_; }

 private:
  std::vector<Packet> transcript_;
};

// ---------------------------------------------------------------------------
// Content comparison

/// Longest-matching-block similarity in the style of difflib's
/// SequenceMatcher (no junk heuristic): 1 - 2M/(len_a + len_b).
double content_diff(std::string_view a, std::string_view b);

enum class DiffStatus { Unblocked, NeedsReview, ConfirmedBlocked };
std::string to_string(DiffStatus s);

struct DiffVerdict {
  std::string domain;
  double difference{0};
  DiffStatus status{DiffStatus::Unblocked};
  std::string fingerprint;
  std::string direct_digest;
  std::string clean_digest;
};

inline constexpr double kDiffThreshold = 0.3;

/// Bodies only; headers never enter the comparison.
DiffVerdict classify_http(const std::string& domain, const std::string& direct_body, const std::string& clean_body,
                          double threshold = kDiffThreshold);
/// Resolves a NeedsReview verdict with an adjudicator's answer.
DiffVerdict apply_review(DiffVerdict v, bool confirmed_blocked);

/// One line per item: domain, difference, direct-body digest, clean-body digest.
std::string review_queue_text(const std::vector<DiffVerdict>& verdicts);

/// Registry fingerprint found in `body`, if any.
std::optional<std::string> extract_fingerprint(std::string_view body);

// OONI-style baseline: flags a page only when body lengths, header names and
// titles all fail to match.
struct OoniComparison {
  bool body_length_match{false};
  bool headers_match{false};
  std::optional<bool> title_match;  // nullopt when no word pair of >= 5 chars exists
  bool blocked{false};
};
inline constexpr double kOoniBodyProportion = 0.7;
OoniComparison ooni_compare(const HttpResponse& experiment, const HttpResponse& control);

// ---------------------------------------------------------------------------
// Probing

struct FetchResult {
  bool connected{false};
  std::optional<HttpResponse> response;  // first response in the accepted stream
  std::vector<Packet> packets;           // everything delivered on the flow
  bool censor_reply{false};
  bool genuine_reply{false};
};

/// GET for `domain` to `server` over the routed network. Port 443 is refused.
FetchResult fetch_direct(netsim::Network& net, const std::string& client, const std::string& domain, Ipv4Addr server,
                         const RequestVariant& variant = variant::Canonical{}, uint16_t port = 80, int ttl = 64);
/// Same through the clean vantage.
std::optional<HttpResponse> fetch_clean(const netsim::Network& net, const std::string& domain, Ipv4Addr server);

enum class TransportVerdict { TcpIpFiltered, NotFiltered };
std::string to_string(TransportVerdict v);
/// Five handshakes two ticks apart; filtered only when all fail. Throws
/// SiteDown when the clean vantage cannot connect either.
TransportVerdict detect_transport_filtering(netsim::Network& net, const std::string& client, Ipv4Addr server,
                                            uint16_t port = 80);

enum class TriggerVerdict { RequestOnly, ResponseOnly, Both };
std::string to_string(TriggerVerdict v);
TriggerVerdict trigger_analysis(netsim::Network& net, const std::string& client, const std::string& domain,
                                Ipv4Addr server, const std::string& allowed_domain);

enum class Placement { HostField, GetPath, HeaderOffset };
std::string to_string(Placement p);
std::set<Placement> fuzz_trigger_fields(netsim::Network& net, const std::string& client, Ipv4Addr server,
                                        const std::string& censored_domain, const std::string& allowed_domain);

struct StatefulnessReport {
  bool stateful{false};
  /// Censor packets seen per script: SYN-only, SYN|ACK-first,
  /// handshake without final ACK, bare GET.
  std::array<int, 4> script_censor_packets{};
  int control_censor_packets{0};
};
StatefulnessReport statefulness_probe(netsim::Network& net, const std::string& client, const std::string& domain,
                                      Ipv4Addr server);

// ---------------------------------------------------------------------------
// Classification

struct Trial {
  std::vector<Packet> transcript;
  bool censor_reply{false};
  bool genuine_reply{false};
  std::optional<bool> server_got_request;  // from the receipt log when available
};

struct Evidence {
  std::string domain;
  Ipv4Addr server;
  tracer::TraceResult trace;
  std::vector<netsim::Hop> hops;
  std::vector<Trial> trials;
  std::optional<bool> alt_port_triggered;
  std::optional<bool> stateful;
};

struct MiddleboxClass {
  netsim::MiddleboxKind kind{netsim::MiddleboxKind::WM};
  bool covert{false};
  std::optional<bool> stateful;
  std::optional<PortScope> port_scope;
  std::string fingerprint;
  std::optional<uint16_t> fixed_ip_id;
  std::optional<tracer::Located> location;
};

inline constexpr uint16_t kAltPort = 8080;

/// Runs `trials` full fetches of `domain`, an exhaustive trace, a probe on
/// kAltPort and, when asked, the statefulness scripts.
Evidence collect_evidence(netsim::Network& net, const std::string& client, const std::string& domain, Ipv4Addr server,
                          int trials = 20, bool probe_state = true);

/// Decision tree over the evidence. Throws Unclassified.
MiddleboxClass classify_middlebox(const Evidence& ev);

json to_json(const DiffVerdict& v);
json to_json(const MiddleboxClass& c);
json to_json(const Evidence& e);

}  // namespace censorlab::http_detect

#endif  // CENSORLAB_HTTP_DETECT_HPP
