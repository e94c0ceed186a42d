#include "censorlab/http.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>

#include "censorlab/wire.hpp"

namespace censorlab {

namespace {

bool is_ows(char c) { return c == ' ' || c == '\t'; }

std::string_view trim_ows(std::string_view s) {
  while (!s.empty() && is_ows(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_ows(s.back())) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_lines(std::string_view block) {
  std::vector<std::string_view> lines;
  size_t pos = 0;
  while (pos <= block.size()) {
    auto end = block.find(kCrlf, pos);
    if (end == std::string_view::npos) {
      if (pos < block.size()) lines.push_back(block.substr(pos));
      break;
    }
    lines.push_back(block.substr(pos, end - pos));
    pos = end + kCrlf.size();
  }
  return lines;
}

bool is_token_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || std::string_view("!#$%&'*+-.^_`|~").find(c) != std::string_view::npos;
}

// METHOD SP request-target SP HTTP/d.d
bool is_request_line(std::string_view line) {
  auto sp1 = line.find(' ');
  if (sp1 == std::string_view::npos || sp1 == 0) return false;
  for (char c : line.substr(0, sp1))
    if (!std::isupper(static_cast<unsigned char>(c))) return false;
  auto sp2 = line.find(' ', sp1 + 1);
  if (sp2 == std::string_view::npos || sp2 == sp1 + 1) return false;
  auto version = line.substr(sp2 + 1);
  return version.size() == 8 && version.substr(0, 5) == "HTTP/" && std::isdigit(static_cast<unsigned char>(version[5])) &&
         version[6] == '.' && std::isdigit(static_cast<unsigned char>(version[7]));
}

std::string lower_ascii(std::string_view s) { return to_lower(s); }

}  // namespace

std::string serialize_http(const RawHttpRequest& req) {
  std::string out = req.request_line;
  for (const auto& line : req.header_lines) {
    out += kCrlf;
    out += line;
  }
  out += req.terminator;
  out += req.trailing_bytes;
  return out;
}

std::vector<std::string> segment_http(const RawHttpRequest& req) {
  auto bytes = serialize_http(req);
  std::vector<std::string> segs;
  size_t prev = 0;
  for (size_t off : req.split_offsets) {
    segs.push_back(bytes.substr(prev, off - prev));
    prev = off;
  }
  segs.push_back(bytes.substr(prev));
  return segs;
}

std::vector<std::string_view> split_request_blocks(std::string_view bytes, bool include_incomplete, size_t* consumed) {
  std::vector<std::string_view> blocks;
  size_t pos = 0;
  while (pos < bytes.size()) {
    auto end = bytes.find(kCrlfCrlf, pos);
    if (end == std::string_view::npos) {
      if (include_incomplete) {
        blocks.push_back(bytes.substr(pos));
        pos = bytes.size();
      }
      break;
    }
    blocks.push_back(bytes.substr(pos, end - pos));
    pos = end + kCrlfCrlf.size();
  }
  if (consumed) *consumed = pos;
  return blocks;
}

std::vector<ServerParsedRequest> parse_http_server(std::string_view bytes) {
  if (bytes.empty()) throw HttpParseError("empty request");
  std::vector<ServerParsedRequest> out;
  for (auto block : split_request_blocks(bytes, true)) {
    auto lines = split_lines(block);
    if (lines.empty()) continue;
    ServerParsedRequest parsed;
    bool has_request_line = is_request_line(lines.front());
    bool malformed_header = false;
    int host_count = 0;
    for (size_t i = has_request_line ? 1 : 0; i < lines.size(); ++i) {
      auto line = lines[i];
      auto colon = line.find(':');
      if (colon == std::string_view::npos || colon == 0) {
        malformed_header = true;
        continue;
      }
      auto name = line.substr(0, colon);
      if (!std::all_of(name.begin(), name.end(), is_token_char)) {
        malformed_header = true;
        continue;
      }
      if (lower_ascii(name) == "host") {
        if (host_count++ == 0) parsed.host = lower_ascii(trim_ows(line.substr(colon + 1)));
      }
    }
    parsed.well_formed = has_request_line && !malformed_header && host_count == 1 && !parsed.host.empty();
    out.push_back(std::move(parsed));
  }
  if (out.empty()) throw HttpParseError("no request line");
  return out;
}

std::optional<std::string> parse_http_censor(std::string_view bytes, const MatcherConfig& cfg) {
  std::string_view region = bytes;
  if (!cfg.scan_trailing_bytes) {
    auto end = bytes.find(kCrlfCrlf);
    if (end != std::string_view::npos) region = bytes.substr(0, end);
  }
  std::optional<std::string> selected;
  for (auto line : split_lines(region)) {
    if (line.size() < 5) continue;
    auto keyword = line.substr(0, 5);
    bool keyword_ok = cfg.keyword_case_sensitive ? keyword == "Host:" : lower_ascii(keyword) == "host:";
    if (!keyword_ok) continue;
    auto rest = line.substr(5);
    std::string_view value;
    if (cfg.require_single_space_after_colon) {
      if (rest.size() < 2 || rest[0] != ' ' || is_ows(rest[1])) continue;
      value = rest.substr(1);
    } else {
      value = rest;
      while (!value.empty() && is_ows(value.front())) value.remove_prefix(1);
    }
    if (cfg.reject_trailing_whitespace) {
      if (!value.empty() && is_ows(value.back())) continue;
    } else {
      while (!value.empty() && is_ows(value.back())) value.remove_suffix(1);
    }
    if (value.empty()) continue;
    selected = lower_ascii(value);
    if (cfg.host_selection == HostSelection::FirstHost) break;
  }
  return selected;
}

RawHttpRequest make_get(std::string_view host, const RequestVariant& v) {
  if (host.empty()) throw std::invalid_argument("make_get: empty host");
  RawHttpRequest req;
  req.request_line = "GET / HTTP/1.1";
  std::string h(host);
  std::visit(
      [&](const auto& var) {
        using T = std::decay_t<decltype(var)>;
        if constexpr (std::is_same_v<T, variant::Canonical>) {
          req.header_lines.push_back("Host: " + h);
        } else if constexpr (std::is_same_v<T, variant::KeywordCase>) {
          if (var.keyword.size() != 4 || lower_ascii(var.keyword) != "host")
            throw std::invalid_argument("keyword '" + var.keyword + "' is not a case permutation of Host");
          req.header_lines.push_back(var.keyword + ": " + h);
        } else if constexpr (std::is_same_v<T, variant::HostWhitespace>) {
          if (var.before < 0 || var.after < 0) throw std::invalid_argument("negative whitespace count");
          char ws = var.tabs ? '\t' : ' ';
          req.header_lines.push_back("Host:" + std::string(var.before, ws) + h + std::string(var.after, ws));
        } else if constexpr (std::is_same_v<T, variant::DoubleHost>) {
          if (var.allowed.empty()) throw std::invalid_argument("double-host: empty allowed domain");
          req.header_lines.push_back("Host: " + h);
          req.trailing_bytes = "Host: " + var.allowed + std::string(kCrlfCrlf);
        } else if constexpr (std::is_same_v<T, variant::Fragmented>) {
          req.header_lines.push_back("Host: " + h);
          auto total = serialize_http(req).size();
          std::vector<size_t> offsets = var.offsets;
          if (offsets.empty()) offsets.push_back(req.request_line.size() + kCrlf.size() + 2);
          size_t prev = 0;
          for (size_t off : offsets) {
            if (off <= prev || off >= total)
              throw std::invalid_argument("split offsets must be strictly increasing and inside the request");
            prev = off;
          }
          req.split_offsets = std::move(offsets);
        }
      },
      v);
  return req;
}

RequestVariant parse_request_variant(std::string_view text) {
  auto colon = text.find(':');
  auto name = text.substr(0, colon);
  auto arg = colon == std::string_view::npos ? std::string_view{} : text.substr(colon + 1);
  auto to_int = [&](std::string_view s) {
    int v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size()) throw std::invalid_argument("bad number in variant '" + std::string(text) + "'");
    return v;
  };
  if (name == "canonical") return variant::Canonical{};
  if (name == "keyword-case") return variant::KeywordCase{std::string(arg)};
  if (name == "double-host") return variant::DoubleHost{std::string(arg)};
  if (name == "whitespace") {
    variant::HostWhitespace ws;
    auto c2 = arg.find(':');
    if (c2 == std::string_view::npos) throw std::invalid_argument("whitespace variant needs BEFORE:AFTER");
    ws.before = to_int(arg.substr(0, c2));
    auto rest = arg.substr(c2 + 1);
    auto c3 = rest.find(':');
    ws.after = to_int(rest.substr(0, c3));
    ws.tabs = c3 != std::string_view::npos && rest.substr(c3 + 1) == "tabs";
    return ws;
  }
  if (name == "fragmented") {
    variant::Fragmented f;
    while (!arg.empty()) {
      auto comma = arg.find(',');
      f.offsets.push_back(static_cast<size_t>(to_int(arg.substr(0, comma))));
      arg = comma == std::string_view::npos ? std::string_view{} : arg.substr(comma + 1);
    }
    return f;
  }
  throw std::invalid_argument("unknown request variant '" + std::string(text) + "'");
}

std::string variant_name(const RequestVariant& v) {
  return std::visit(
      [](const auto& var) -> std::string {
        using T = std::decay_t<decltype(var)>;
        if constexpr (std::is_same_v<T, variant::Canonical>) {
          return "canonical";
        } else if constexpr (std::is_same_v<T, variant::KeywordCase>) {
          return "keyword-case:" + var.keyword;
        } else if constexpr (std::is_same_v<T, variant::HostWhitespace>) {
          return "whitespace:" + std::to_string(var.before) + ":" + std::to_string(var.after) + (var.tabs ? ":tabs" : "");
        } else if constexpr (std::is_same_v<T, variant::DoubleHost>) {
          return "double-host:" + var.allowed;
        } else {
          std::string s = "fragmented";
          for (size_t i = 0; i < var.offsets.size(); ++i) s += (i ? "," : ":") + std::to_string(var.offsets[i]);
          return s;
        }
      },
      v);
}

std::optional<std::string> HttpResponse::header(std::string_view name) const {
  auto want = lower_ascii(name);
  for (const auto& [n, v] : header_fields)
    if (lower_ascii(n) == want) return v;
  return std::nullopt;
}

std::optional<std::string> extract_title(std::string_view body) {
  auto lower = lower_ascii(body);
  auto open = lower.find("<title");
  if (open == std::string::npos) return std::nullopt;
  auto gt = lower.find('>', open);
  if (gt == std::string::npos) return std::nullopt;
  auto close = lower.find("</title>", gt);
  if (close == std::string::npos) return std::nullopt;
  return std::string(body.substr(gt + 1, close - gt - 1));
}

std::string reason_phrase(int status) {
  switch (status) {
    case 200: return "OK";
    case 302: return "Found";
    case 400: return "Bad Request";
    case 403: return "Forbidden";
    case 404: return "Not Found";
    default: return "Unknown";
  }
}

std::string render_response(const HttpResponse& r) {
  std::string out = "HTTP/1.1 " + std::to_string(r.status) + " " + reason_phrase(r.status) + "\r\n";
  bool has_length = false;
  for (const auto& [n, v] : r.header_fields) {
    if (lower_ascii(n) == "content-length") {
      has_length = true;
      out += n + ": " + std::to_string(r.body.size()) + "\r\n";
    } else {
      out += n + ": " + v + "\r\n";
    }
  }
  if (!has_length) out += "Content-Length: " + std::to_string(r.body.size()) + "\r\n";
  out += "\r\n";
  out += r.body;
  return out;
}

std::vector<HttpResponse> parse_http_responses(std::string_view bytes) {
  std::vector<HttpResponse> out;
  size_t pos = 0;
  while (pos < bytes.size()) {
    auto head_end = bytes.find(kCrlfCrlf, pos);
    if (head_end == std::string_view::npos) break;
    auto lines = split_lines(bytes.substr(pos, head_end - pos));
    if (lines.empty() || lines.front().substr(0, 5) != "HTTP/") break;
    HttpResponse resp;
    auto status_line = lines.front();
    auto sp = status_line.find(' ');
    if (sp == std::string_view::npos) break;
    int status = 0;
    std::from_chars(status_line.data() + sp + 1, status_line.data() + status_line.size(), status);
    resp.status = status;
    std::optional<size_t> length;
    for (size_t i = 1; i < lines.size(); ++i) {
      auto colon = lines[i].find(':');
      if (colon == std::string_view::npos) continue;
      std::string name(lines[i].substr(0, colon));
      std::string value(trim_ows(lines[i].substr(colon + 1)));
      if (lower_ascii(name) == "content-length") {
        size_t n = 0;
        std::from_chars(value.data(), value.data() + value.size(), n);
        length = n;
      }
      resp.header_fields.emplace_back(std::move(name), std::move(value));
    }
    size_t body_start = head_end + kCrlfCrlf.size();
    size_t body_len = length.value_or(bytes.size() - body_start);
    if (body_start + body_len > bytes.size()) break;
    resp.body = std::string(bytes.substr(body_start, body_len));
    resp.title_tag = extract_title(resp.body);
    out.push_back(std::move(resp));
    pos = body_start + body_len;
  }
  return out;
}

}  // namespace censorlab
