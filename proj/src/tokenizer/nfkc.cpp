#include "embedkit/tokenizer/nfkc.hpp"

#include <algorithm>

#include "embedkit/common/utf8.hpp"

namespace embedkit::tok {

namespace {

using namespace nfkc_data;

// Hangul syllable arithmetic from the Unicode standard (chapter 3.12).
constexpr char32_t kSBase = 0xAC00;
constexpr char32_t kLBase = 0x1100;
constexpr char32_t kVBase = 0x1161;
constexpr char32_t kTBase = 0x11A7;
constexpr int kLCount = 19, kVCount = 21, kTCount = 28;
constexpr int kNCount = kVCount * kTCount;
constexpr int kSCount = kLCount * kNCount;

const std::uint32_t* find_key(const std::uint32_t* keys, std::size_t count,
                              std::uint32_t cp) {
  const std::uint32_t* end = keys + count;
  const std::uint32_t* it = std::lower_bound(keys, end, cp);
  return (it != end && *it == cp) ? it : nullptr;
}

void decompose_one(char32_t cp, std::u32string& out) {
  if (cp >= kSBase && cp < kSBase + kSCount) {
    int index = int(cp - kSBase);
    out.push_back(kLBase + index / kNCount);
    out.push_back(kVBase + (index % kNCount) / kTCount);
    int t = index % kTCount;
    if (t != 0) out.push_back(kTBase + t);
    return;
  }
  if (const auto* it = find_key(kDecompKeys, kDecompCount, cp)) {
    std::size_t idx = std::size_t(it - kDecompKeys);
    for (std::uint32_t i = kDecompOffsets[idx]; i < kDecompOffsets[idx + 1]; ++i) {
      out.push_back(kDecompPool[i]);
    }
    return;
  }
  out.push_back(cp);
}

void canonical_order(std::u32string& s) {
  // Stable exchange sort over maximal runs of nonzero combining classes.
  for (std::size_t i = 1; i < s.size(); ++i) {
    std::uint8_t cc = combining_class(s[i]);
    if (cc == 0) continue;
    std::size_t j = i;
    while (j > 0) {
      std::uint8_t prev = combining_class(s[j - 1]);
      if (prev == 0 || prev <= cc) break;
      std::swap(s[j - 1], s[j]);
      --j;
    }
  }
}

bool compose_pair(char32_t a, char32_t b, char32_t& out) {
  // Hangul L+V and LV+T
  if (a >= kLBase && a < kLBase + kLCount && b >= kVBase && b < kVBase + kVCount) {
    out = kSBase + (char32_t(a - kLBase) * kNCount) +
          char32_t(b - kVBase) * kTCount;
    return true;
  }
  if (a >= kSBase && a < kSBase + kSCount && (a - kSBase) % kTCount == 0 &&
      b > kTBase && b < kTBase + kTCount) {
    out = a + (b - kTBase);
    return true;
  }
  std::uint64_t key = (std::uint64_t(a) << 21) | b;
  const std::uint64_t* end = kCompKeys + kCompCount;
  const std::uint64_t* it = std::lower_bound(kCompKeys, end, key);
  if (it != end && *it == key) {
    out = kCompValues[it - kCompKeys];
    return true;
  }
  return false;
}

void compose(std::u32string& s) {
  if (s.empty()) return;
  std::u32string out;
  out.reserve(s.size());
  std::ptrdiff_t last_starter = -1;
  for (char32_t c : s) {
    std::uint8_t cc = combining_class(c);
    if (last_starter >= 0) {
      // Blocked iff some character sits between the starter and c with a
      // combining class >= ccc(c); checking the previous output suffices.
      bool adjacent = std::size_t(last_starter) + 1 == out.size();
      bool blocked = !adjacent && combining_class(out.back()) >= cc;
      char32_t composed;
      if (!blocked && compose_pair(out[std::size_t(last_starter)], c, composed)) {
        out[std::size_t(last_starter)] = composed;
        continue;
      }
    }
    if (cc == 0) last_starter = std::ptrdiff_t(out.size());
    out.push_back(c);
  }
  s = std::move(out);
}

}  // namespace

std::uint8_t combining_class(char32_t cp) {
  const std::uint32_t* end = kCccKeys + kCccCount;
  const std::uint32_t* it = std::lower_bound(kCccKeys, end, std::uint32_t(cp));
  return (it != end && *it == std::uint32_t(cp)) ? kCccValues[it - kCccKeys] : 0;
}

std::u32string nfkc(const std::u32string& s) {
  std::u32string decomposed;
  decomposed.reserve(s.size() + s.size() / 4);
  for (char32_t cp : s) decompose_one(cp, decomposed);
  canonical_order(decomposed);
  compose(decomposed);
  return decomposed;
}

std::string nfkc_utf8(std::string_view s) {
  return encode_utf8(nfkc(decode_utf8(s)));
}

}  // namespace embedkit::tok
