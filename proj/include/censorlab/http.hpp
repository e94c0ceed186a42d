#ifndef CENSORLAB_HTTP_HPP
#define CENSORLAB_HTTP_HPP

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace censorlab {

inline constexpr std::string_view kCrlf = "\r\n";
inline constexpr std::string_view kCrlfCrlf = "\r\n\r\n";

class HttpParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An HTTP request kept as raw lines so case, spacing and duplication survive
/// exactly as crafted.
struct RawHttpRequest {
  std::string request_line;
  std::vector<std::string> header_lines;
  std::string terminator{kCrlfCrlf};
  std::string trailing_bytes;
  /// Byte offsets into the serialized request at which the sender cuts it into
  /// separate TCP segments. Empty means one segment.
  std::vector<size_t> split_offsets;
};

std::string serialize_http(const RawHttpRequest& req);

/// Serialized request cut at req.split_offsets.
std::vector<std::string> segment_http(const RawHttpRequest& req);

struct ServerParsedRequest {
  std::string host;
  bool well_formed{false};

  bool operator==(const ServerParsedRequest&) const = default;
};

/// Lenient origin-server parse. Every CRLF-CRLF delimited block is a separate
/// request; header names compare case-insensitively and optional whitespace
/// around values is dropped. A block lacking a request line, a Host header, or
/// carrying more than one Host header is not well formed (the server answers
/// 400). Throws HttpParseError on empty input.
std::vector<ServerParsedRequest> parse_http_server(std::string_view bytes);

/// Splits a byte stream into request blocks. When `include_incomplete` is
/// false, a tail not yet closed by CRLF-CRLF is left out and its offset
/// returned through `consumed`.
std::vector<std::string_view> split_request_blocks(std::string_view bytes, bool include_incomplete,
                                                   size_t* consumed = nullptr);

enum class HostSelection { FirstHost, LastHost };
enum class PortScope { Port80Only, AllPorts };

/// The censor's parser policy.
struct MatcherConfig {
  bool keyword_case_sensitive{false};
  bool require_single_space_after_colon{false};
  bool reject_trailing_whitespace{false};
  HostSelection host_selection{HostSelection::FirstHost};
  bool scan_trailing_bytes{false};
  PortScope ports{PortScope::Port80Only};

  bool operator==(const MatcherConfig&) const = default;
};

/// Domain the censor would extract from a payload under `cfg`, or nothing.
/// Only lines that start with the Host keyword are considered; a domain
/// anywhere else in the payload is invisible. Never throws.
std::optional<std::string> parse_http_censor(std::string_view bytes, const MatcherConfig& cfg);

namespace variant {
struct Canonical {};
struct KeywordCase {
  std::string keyword;
};
struct HostWhitespace {
  int before{1};
  int after{0};
  bool tabs{false};
};
struct DoubleHost {
  std::string allowed;
};
struct Fragmented {
  std::vector<size_t> offsets;  // empty: split after "Ho" of the Host keyword
};
}  // namespace variant

using RequestVariant = std::variant<variant::Canonical, variant::KeywordCase, variant::HostWhitespace,
                                    variant::DoubleHost, variant::Fragmented>;

/// Builds a GET for `host` mutated per `v`. Throws std::invalid_argument for an
/// empty host, a keyword that is not a case permutation of "Host", or split
/// offsets that are not strictly increasing inside the request.
RawHttpRequest make_get(std::string_view host, const RequestVariant& v = variant::Canonical{});

/// Parses "canonical", "keyword-case:HOst", "whitespace:BEFORE:AFTER[:tabs]",
/// "double-host:DOMAIN" or "fragmented[:O1,O2,...]". Throws on unknown names.
RequestVariant parse_request_variant(std::string_view text);
std::string variant_name(const RequestVariant& v);

struct HttpResponse {
  int status{200};
  std::vector<std::pair<std::string, std::string>> header_fields;
  std::string body;
  std::optional<std::string> title_tag;

  std::optional<std::string> header(std::string_view name) const;
};

/// Text of the first <title> element, if any.
std::optional<std::string> extract_title(std::string_view body);

std::string reason_phrase(int status);

/// Renders status line, headers (Content-Length is set from the body) and body.
std::string render_response(const HttpResponse& r);

/// Parses back-to-back responses framed by Content-Length. Stops quietly at a
/// truncated tail.
std::vector<HttpResponse> parse_http_responses(std::string_view bytes);

}  // namespace censorlab

#endif  // CENSORLAB_HTTP_HPP
