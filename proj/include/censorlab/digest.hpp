#ifndef CENSORLAB_DIGEST_HPP
#define CENSORLAB_DIGEST_HPP

#include <string>
#include <string_view>

namespace censorlab {

/// Lowercase hex SHA-256 of `bytes`.
std::string sha256_hex(std::string_view bytes);

}  // namespace censorlab

#endif  // CENSORLAB_DIGEST_HPP
