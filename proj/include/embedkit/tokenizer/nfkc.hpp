#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

namespace embedkit::tok {

// Unicode NFKC: full compatibility decomposition (Hangul handled
// algorithmically), canonical reordering, then canonical composition.
std::u32string nfkc(const std::u32string& s);
std::string nfkc_utf8(std::string_view s);

std::uint8_t combining_class(char32_t cp);

namespace nfkc_data {
extern const std::size_t kDecompCount;
extern const std::uint32_t kDecompKeys[];
extern const std::uint32_t kDecompOffsets[];
extern const std::uint32_t kDecompPool[];
extern const std::size_t kCccCount;
extern const std::uint32_t kCccKeys[];
extern const std::uint8_t kCccValues[];
extern const std::size_t kCompCount;
extern const std::uint64_t kCompKeys[];
extern const std::uint32_t kCompValues[];
}  // namespace nfkc_data

}  // namespace embedkit::tok
