#pragma once

#include <map>
#include <regex>
#include <string>
#include <string_view>
#include <vector>

#include "embedkit/common/jsonl.hpp"

namespace embedkit::tok {

// Declarative normalization config: which script ranges survive, how
// letter/digit variants fold onto canonical forms, and which textual noise
// patterns are stripped. Loaded from the versioned "normalizer" config
// section; see docs/formats.md.
struct NormalizerConfig {
  std::vector<std::pair<char32_t, char32_t>> retained_ranges;  // inclusive
  std::map<char32_t, char32_t> letter_map;
  std::map<char32_t, char32_t> digit_map;
  std::vector<std::string> strip_patterns;  // ECMAScript regexes over UTF-8

  static NormalizerConfig from_json(const json& j);
  json to_json() const;

  // Enforces the invariants that make normalization idempotent: maps are
  // injective, outputs are NFKC-stable single codepoints inside the retained
  // ranges, and no map output is itself a map key.
  void validate() const;

  bool retained(char32_t cp) const;
};

class Normalizer {
public:
  explicit Normalizer(NormalizerConfig cfg);

  // NFKC + letter/digit folding + range filtering + URL/markup stripping +
  // whitespace canonicalization, iterated to a fixpoint. Idempotent.
  std::string normalize(std::string_view text) const;

  const NormalizerConfig& config() const { return cfg_; }

private:
  std::string pass(const std::string& text) const;

  NormalizerConfig cfg_;
  std::vector<std::regex> patterns_;
};

inline std::string normalize(std::string_view text, const NormalizerConfig& cfg) {
  return Normalizer(cfg).normalize(text);
}

}  // namespace embedkit::tok
