#pragma once

#include <string>
#include <string_view>

namespace lxm::text {

/// Throws DecodeError (with byte offset) on malformed UTF-8.
std::u32string decode_utf8(std::string_view bytes);
std::string to_utf8(std::u32string_view cps);
/// Simple per-code-point lowercase mapping.
std::string lowercase_utf8(std::string_view bytes);

}  // namespace lxm::text
