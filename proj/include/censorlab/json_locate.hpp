#ifndef CENSORLAB_JSON_LOCATE_HPP
#define CENSORLAB_JSON_LOCATE_HPP

#include <cstddef>
#include <optional>
#include <string_view>

namespace censorlab {

/// 1-based line of byte `offset` in `text`.
int line_of_offset(std::string_view text, size_t offset);

/// 1-based line where the value named by the JSON pointer starts in `text`,
/// falling back to the nearest ancestor that exists. nullopt when not even
/// the root parses.
std::optional<int> locate_line(std::string_view text, std::string_view pointer);

}  // namespace censorlab

#endif  // CENSORLAB_JSON_LOCATE_HPP
