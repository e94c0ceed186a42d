#include "censorlab/wire.hpp"

#include <cctype>
#include <cstdio>
#include <stdexcept>

namespace censorlab {

namespace {
struct FlagName {
  uint8_t bit;
  const char* name;
};
constexpr FlagName kFlagNames[] = {
    {tcp::kSyn, "SYN"}, {tcp::kAck, "ACK"}, {tcp::kFin, "FIN"}, {tcp::kRst, "RST"}, {tcp::kPsh, "PSH"}};
}  // namespace

std::string flags_str(uint8_t flags) {
  std::string out;
  for (const auto& f : kFlagNames) {
    if (flags & f.bit) {
      if (!out.empty()) out += '|';
      out += f.name;
    }
  }
  return out.empty() ? "-" : out;
}

uint8_t flag_from_name(std::string_view name) {
  std::string upper;
  for (char c : name) upper += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  for (const auto& f : kFlagNames)
    if (upper == f.name) return f.bit;
  throw std::invalid_argument("unknown TCP flag '" + std::string(name) + "'");
}

std::string to_lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string hex_dump(std::string_view bytes) {
  std::string out;
  char buf[8];
  for (size_t row = 0; row < bytes.size(); row += 16) {
    std::snprintf(buf, sizeof buf, "%06zx", row);
    out += buf;
    out += "  ";
    for (size_t i = 0; i < 16; ++i) {
      if (row + i < bytes.size()) {
        std::snprintf(buf, sizeof buf, "%02x ", static_cast<unsigned char>(bytes[row + i]));
        out += buf;
      } else {
        out += "   ";
      }
    }
    out += ' ';
    for (size_t i = 0; i < 16 && row + i < bytes.size(); ++i) {
      unsigned char c = static_cast<unsigned char>(bytes[row + i]);
      out += std::isprint(c) ? static_cast<char>(c) : '.';
    }
    out += '\n';
  }
  return out;
}

std::string describe(const Packet& p) {
  std::string out = p.src.str() + " > " + p.dst.str() + " ttl=" + std::to_string(p.ttl) +
                    " id=" + std::to_string(p.ip_id) + " ";
  if (auto* t = p.tcp()) {
    out += "TCP " + std::to_string(t->sport) + ">" + std::to_string(t->dport) + " [" + flags_str(t->flags) +
           "] seq=" + std::to_string(t->seq) + " ack=" + std::to_string(t->ack) +
           " len=" + std::to_string(t->data.size());
  } else if (auto* d = p.dns()) {
    out += std::string(d->kind == DnsKind::Query ? "DNS query " : "DNS response ") + d->qname;
    for (const auto& a : d->answers) out += " " + a.str();
  } else if (auto* i = p.icmp()) {
    out += "ICMP time-exceeded (orig dst " + i->orig_dst.str() + ")";
  }
  return out;
}

}  // namespace censorlab
