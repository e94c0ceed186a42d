#ifndef CENSORLAB_IPV4_HPP
#define CENSORLAB_IPV4_HPP

#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>

namespace censorlab {

/// IPv4 address held as a host-order 32-bit integer.
struct Ipv4Addr {
  uint32_t value{0};

  constexpr Ipv4Addr() = default;
  constexpr explicit Ipv4Addr(uint32_t v) : value(v) {}
  constexpr Ipv4Addr(uint8_t a, uint8_t b, uint8_t c, uint8_t d)
      : value((uint32_t{a} << 24) | (uint32_t{b} << 16) | (uint32_t{c} << 8) | uint32_t{d}) {}

  /// Dotted-quad rendering.
  std::string str() const;

  /// Strict dotted-quad parse; nullopt on anything malformed.
  static std::optional<Ipv4Addr> parse(std::string_view text);
  /// Like parse() but throws std::invalid_argument.
  static Ipv4Addr from_string(std::string_view text);

  auto operator<=>(const Ipv4Addr&) const = default;
};

/// CIDR prefix. The network address is stored masked.
struct Prefix {
  Ipv4Addr network;
  uint8_t length{0};

  Prefix() = default;
  Prefix(Ipv4Addr addr, uint8_t len);

  uint32_t mask() const { return length == 0 ? 0u : ~uint32_t{0} << (32 - length); }
  Ipv4Addr first() const { return network; }
  Ipv4Addr last() const { return Ipv4Addr{network.value | ~mask()}; }
  uint64_t size() const { return uint64_t{1} << (32 - length); }
  bool contains(Ipv4Addr ip) const { return (ip.value & mask()) == network.value; }

  std::string str() const;
  static Prefix from_string(std::string_view text);

  auto operator<=>(const Prefix&) const = default;
};

}  // namespace censorlab

template <>
struct std::hash<censorlab::Ipv4Addr> {
  size_t operator()(const censorlab::Ipv4Addr& a) const noexcept { return std::hash<uint32_t>{}(a.value); }
};

#endif  // CENSORLAB_IPV4_HPP
