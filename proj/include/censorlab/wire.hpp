#ifndef CENSORLAB_WIRE_HPP
#define CENSORLAB_WIRE_HPP

#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "censorlab/ipv4.hpp"

namespace censorlab {

namespace tcp {
inline constexpr uint8_t kSyn = 0x01;
inline constexpr uint8_t kAck = 0x02;
inline constexpr uint8_t kFin = 0x04;
inline constexpr uint8_t kRst = 0x08;
inline constexpr uint8_t kPsh = 0x10;
}  // namespace tcp

/// Renders a flag set as e.g. "SYN|ACK"; empty set renders as "-".
std::string flags_str(uint8_t flags);
/// Parses a single flag name ("SYN", "fin", ...). Throws on unknown names.
uint8_t flag_from_name(std::string_view name);

struct TcpSegment {
  uint16_t sport{0};
  uint16_t dport{0};
  uint32_t seq{0};
  uint32_t ack{0};
  uint8_t flags{0};
  std::string data;

  bool has(uint8_t f) const { return (flags & f) == f; }
  bool any(uint8_t mask) const { return (flags & mask) != 0; }
  /// Sequence space consumed: payload bytes plus one for SYN and one for FIN.
  uint32_t seq_len() const {
    return static_cast<uint32_t>(data.size()) + (has(tcp::kSyn) ? 1u : 0u) + (has(tcp::kFin) ? 1u : 0u);
  }
};

enum class DnsKind { Query, Response };

struct DnsMessage {
  DnsKind kind{DnsKind::Query};
  uint16_t txid{0};
  std::string qname;
  std::vector<Ipv4Addr> answers;
};

struct IcmpMessage {
  enum class Type { TimeExceeded };
  Type type{Type::TimeExceeded};
  // Quoted header of the expired datagram, enough to match it to a probe.
  Ipv4Addr orig_dst;
  uint16_t orig_ip_id{0};
  uint16_t orig_sport{0};
  uint16_t orig_dport{0};
};

using Payload = std::variant<TcpSegment, DnsMessage, IcmpMessage>;

struct Packet {
  Ipv4Addr src;
  Ipv4Addr dst;
  uint8_t ttl{64};
  uint16_t ip_id{0};
  Payload payload;

  const TcpSegment* tcp() const { return std::get_if<TcpSegment>(&payload); }
  const DnsMessage* dns() const { return std::get_if<DnsMessage>(&payload); }
  const IcmpMessage* icmp() const { return std::get_if<IcmpMessage>(&payload); }
  TcpSegment* tcp() { return std::get_if<TcpSegment>(&payload); }
  DnsMessage* dns() { return std::get_if<DnsMessage>(&payload); }
};

/// Lowercases ASCII letters.
std::string to_lower(std::string_view s);

/// Classic 16-bytes-per-row hex dump with an ASCII gutter.
std::string hex_dump(std::string_view bytes);

/// One-line human summary of a packet, used in transcripts and the CLI.
std::string describe(const Packet& p);

}  // namespace censorlab

#endif  // CENSORLAB_WIRE_HPP
