#include "censorlab/json_locate.hpp"

#include <algorithm>
#include <cctype>
#include <string>
#include <vector>

namespace censorlab {

int line_of_offset(std::string_view text, size_t offset) {
  offset = std::min(offset, text.size());
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(offset), '\n'));
}

namespace {

class Scanner {
 public:
  explicit Scanner(std::string_view s) : s_(s) {}

  std::optional<size_t> seek(const std::vector<std::string>& tokens, size_t depth) {
    ws();
    if (depth == tokens.size()) return i_ < s_.size() ? std::optional<size_t>(i_) : std::nullopt;
    if (i_ >= s_.size()) return std::nullopt;
    const auto& tok = tokens[depth];
    if (s_[i_] == '{') {
      ++i_;
      for (;;) {
        ws();
        if (i_ >= s_.size() || s_[i_] == '}') return std::nullopt;
        auto key = string();
        if (!key) return std::nullopt;
        ws();
        if (i_ >= s_.size() || s_[i_] != ':') return std::nullopt;
        ++i_;
        if (*key == tok) return seek(tokens, depth + 1);
        if (!skip()) return std::nullopt;
        ws();
        if (i_ < s_.size() && s_[i_] == ',') ++i_;
      }
    }
    if (s_[i_] == '[') {
      ++i_;
      if (tok.empty() || !std::all_of(tok.begin(), tok.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }))
        return std::nullopt;
      size_t want = std::stoul(tok);
      for (size_t k = 0;; ++k) {
        ws();
        if (i_ >= s_.size() || s_[i_] == ']') return std::nullopt;
        if (k == want) return seek(tokens, depth + 1);
        if (!skip()) return std::nullopt;
        ws();
        if (i_ < s_.size() && s_[i_] == ',') ++i_;
      }
    }
    return std::nullopt;
  }

 private:
  void ws() {
    while (i_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[i_]))) ++i_;
  }

  std::optional<std::string> string() {
    if (i_ >= s_.size() || s_[i_] != '"') return std::nullopt;
    ++i_;
    std::string out;
    while (i_ < s_.size() && s_[i_] != '"') {
      if (s_[i_] == '\\' && i_ + 1 < s_.size()) {
        ++i_;
        switch (s_[i_]) {
          case 'n': out += '\n'; break;
          case 't': out += '\t'; break;
          case 'r': out += '\r'; break;
          case 'b': out += '\b'; break;
          case 'f': out += '\f'; break;
          case 'u': out += '?'; i_ += 4; break;  // keys with \u escapes never match a pointer token exactly
          default: out += s_[i_];
        }
        ++i_;
      } else {
        out += s_[i_++];
      }
    }
    if (i_ >= s_.size()) return std::nullopt;
    ++i_;
    return out;
  }

  bool skip() {
    ws();
    if (i_ >= s_.size()) return false;
    char c = s_[i_];
    if (c == '"') return string().has_value();
    if (c == '{' || c == '[') {
      int depth = 0;
      while (i_ < s_.size()) {
        char d = s_[i_];
        if (d == '"') {
          if (!string()) return false;
          continue;
        }
        if (d == '{' || d == '[') ++depth;
        if (d == '}' || d == ']') --depth;
        ++i_;
        if (depth == 0) return true;
      }
      return false;
    }
    while (i_ < s_.size() && s_[i_] != ',' && s_[i_] != '}' && s_[i_] != ']' &&
           !std::isspace(static_cast<unsigned char>(s_[i_])))
      ++i_;
    return true;
  }

  std::string_view s_;
  size_t i_{0};
};

std::vector<std::string> pointer_tokens(std::string_view p) {
  std::vector<std::string> out;
  if (p.empty()) return out;
  p.remove_prefix(1);
  for (;;) {
    auto slash = p.find('/');
    std::string tok;
    auto raw = p.substr(0, slash);
    for (size_t k = 0; k < raw.size(); ++k) {
      if (raw[k] == '~' && k + 1 < raw.size()) {
        tok += raw[k + 1] == '1' ? '/' : '~';
        ++k;
      } else {
        tok += raw[k];
      }
    }
    out.push_back(tok);
    if (slash == std::string_view::npos) break;
    p = p.substr(slash + 1);
  }
  return out;
}

}  // namespace

std::optional<int> locate_line(std::string_view text, std::string_view pointer) {
  if (!pointer.empty() && pointer.front() != '/') return std::nullopt;
  // A missing member is reported at its closest existing parent.
  auto tokens = pointer_tokens(pointer);
  for (;;) {
    Scanner sc(text);
    if (auto pos = sc.seek(tokens, 0)) return line_of_offset(text, *pos);
    if (tokens.empty()) return std::nullopt;
    tokens.pop_back();
  }
}

}  // namespace censorlab
