#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace speedrun::backend {

// 64-bit FNV-1a over the raw bytes of text.
std::uint64_t fnv1a64(std::string_view text);

// fnv1a64 rendered as 16 lowercase hex digits.  digest("") is the FNV offset
// basis, "cbf29ce484222325".
std::string digest(std::string_view text);

}  // namespace speedrun::backend
