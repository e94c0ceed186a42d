#ifndef CENSORLAB_TRACER_HPP
#define CENSORLAB_TRACER_HPP

#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "censorlab/http.hpp"
#include "censorlab/netsim.hpp"

namespace censorlab::tracer {

/// Raised when the pre-probe handshake cannot be completed. Distinct from a
/// per-TTL Timeout.
class TransportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct HttpGet {
  RawHttpRequest request;
  bool requires_handshake{true};
  uint16_t dport{80};
};

struct DnsQuery {
  std::string qname;
};

struct ProbeSpec {
  std::variant<HttpGet, DnsQuery> kind;
  Ipv4Addr dst;  // web server, or resolver for DNS probes
  int ttl_min{1};
  int ttl_max{32};
  bool exhaustive{false};
  int retries{3};
};

enum class RecordKind { IcmpFrom, CensorResponse, ServerResponse, ManipulatedDnsAnswer, HonestDnsAnswer, Timeout };
std::string to_string(RecordKind k);

struct TraceRecord {
  int ttl{0};
  RecordKind kind{RecordKind::Timeout};
  std::optional<Ipv4Addr> addr;    // IcmpFrom, ManipulatedDnsAnswer
  std::vector<Ipv4Addr> answers;   // DNS answers
  std::string fingerprint;         // CensorResponse, when a registry entry matched
  uint8_t flags{0};                // CensorResponse
  uint16_t ip_id{0};               // CensorResponse
  std::string body;                // CensorResponse body, empty for bare RST
};

struct TraceResult {
  std::vector<TraceRecord> records;
  /// Every packet delivered to the client during the trace, in arrival order.
  std::vector<Packet> transcript;

  const TraceRecord* at(int ttl) const;
};

/// Sends the probe with increasing TTL and classifies what came back at each
/// step. HTTP probes open a fresh connection per TTL at full TTL and only send
/// the request with the limited TTL. Stops after the destination has answered
/// (HTTP) or at the first DNS answer, unless `exhaustive`.
TraceResult iterative_trace(netsim::Network& net, const std::string& client, const ProbeSpec& spec);

struct Located {
  int hop{0};
  std::optional<Ipv4Addr> addr;  // nullopt when the hop is anonymized
  std::string as_label;
};

/// Smallest TTL with a censor response, mapped onto the traceroute hops.
/// nullopt when no censor response was recorded.
std::optional<Located> locate_middlebox(const TraceResult& trace, const std::vector<netsim::Hop>& hops);

enum class DnsMechanism { Poisoning, Injection };
std::string to_string(DnsMechanism m);

/// Injection iff a manipulated answer shows up before the resolver's hop.
/// Throws std::invalid_argument when the trace holds no manipulated answer.
DnsMechanism classify_dns_mechanism(const TraceResult& trace, int path_len);

std::string trace_to_jsonl(const TraceResult& trace);
/// Fixed-width per-TTL table for terminals.
std::string render_trace_table(const TraceResult& trace);

}  // namespace censorlab::tracer

#endif  // CENSORLAB_TRACER_HPP
