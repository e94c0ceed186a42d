#include "censorlab/ipv4.hpp"

#include <charconv>
#include <stdexcept>

namespace censorlab {

std::string Ipv4Addr::str() const {
  std::string out;
  for (int shift = 24; shift >= 0; shift -= 8) {
    out += std::to_string((value >> shift) & 0xff);
    if (shift) out += '.';
  }
  return out;
}

std::optional<Ipv4Addr> Ipv4Addr::parse(std::string_view text) {
  uint32_t result = 0;
  size_t pos = 0;
  for (int octet = 0; octet < 4; ++octet) {
    if (octet > 0) {
      if (pos >= text.size() || text[pos] != '.') return std::nullopt;
      ++pos;
    }
    size_t start = pos;
    while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') ++pos;
    if (pos == start || pos - start > 3) return std::nullopt;
    unsigned v = 0;
    std::from_chars(text.data() + start, text.data() + pos, v);
    if (v > 255) return std::nullopt;
    result = (result << 8) | v;
  }
  if (pos != text.size()) return std::nullopt;
  return Ipv4Addr{result};
}

Ipv4Addr Ipv4Addr::from_string(std::string_view text) {
  auto a = parse(text);
  if (!a) throw std::invalid_argument("bad IPv4 address: '" + std::string(text) + "'");
  return *a;
}

Prefix::Prefix(Ipv4Addr addr, uint8_t len) : length(len) {
  if (len > 32) throw std::invalid_argument("prefix length > 32");
  network = Ipv4Addr{addr.value & mask()};
}

std::string Prefix::str() const { return network.str() + "/" + std::to_string(length); }

Prefix Prefix::from_string(std::string_view text) {
  auto slash = text.find('/');
  if (slash == std::string_view::npos) return Prefix{Ipv4Addr::from_string(text), 32};
  unsigned len = 0;
  auto tail = text.substr(slash + 1);
  auto [p, ec] = std::from_chars(tail.data(), tail.data() + tail.size(), len);
  if (ec != std::errc{} || p != tail.data() + tail.size() || len > 32)
    throw std::invalid_argument("bad prefix: '" + std::string(text) + "'");
  return Prefix{Ipv4Addr::from_string(text.substr(0, slash)), static_cast<uint8_t>(len)};
}

}  // namespace censorlab
