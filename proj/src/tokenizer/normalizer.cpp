#include "embedkit/tokenizer/normalizer.hpp"

#include <set>

#include "embedkit/common/errors.hpp"
#include "embedkit/common/utf8.hpp"
#include "embedkit/tokenizer/chartypes.hpp"
#include "embedkit/tokenizer/nfkc.hpp"

namespace embedkit::tok {

namespace {

char32_t parse_cp(const std::string& s, const std::string& context) {
  if (s.empty()) fail_config(context + ": empty codepoint");
  char32_t cp = 0;
  for (char c : s) {
    int d;
    if (c >= '0' && c <= '9') d = c - '0';
    else if (c >= 'a' && c <= 'f') d = c - 'a' + 10;
    else if (c >= 'A' && c <= 'F') d = c - 'A' + 10;
    else fail_config(context + ": bad hex codepoint '" + s + "'");
    cp = cp * 16 + char32_t(d);
  }
  if (cp > 0x10FFFF) fail_config(context + ": codepoint out of range '" + s + "'");
  return cp;
}

std::string cp_hex(char32_t cp) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04X", unsigned(cp));
  return buf;
}

std::map<char32_t, char32_t> parse_map(const json& j, const std::string& context) {
  std::map<char32_t, char32_t> out;
  for (auto it = j.begin(); it != j.end(); ++it) {
    out[parse_cp(it.key(), context)] =
        parse_cp(it.value().get<std::string>(), context);
  }
  return out;
}

json dump_map(const std::map<char32_t, char32_t>& m) {
  json j = json::object();
  for (auto [k, v] : m) j[cp_hex(k)] = cp_hex(v);
  return j;
}

}  // namespace

NormalizerConfig NormalizerConfig::from_json(const json& j) {
  NormalizerConfig cfg;
  for (const auto& r : require_field(j, "retained_ranges", "normalizer config")) {
    if (!r.is_array() || r.size() != 2) {
      fail_config("normalizer config: retained_ranges entries are [lo, hi] pairs");
    }
    cfg.retained_ranges.emplace_back(parse_cp(r[0].get<std::string>(), "range"),
                                     parse_cp(r[1].get<std::string>(), "range"));
  }
  if (j.contains("letter_map")) cfg.letter_map = parse_map(j["letter_map"], "letter_map");
  if (j.contains("digit_map")) cfg.digit_map = parse_map(j["digit_map"], "digit_map");
  if (j.contains("strip_patterns")) {
    for (const auto& p : j["strip_patterns"]) {
      cfg.strip_patterns.push_back(p.get<std::string>());
    }
  }
  cfg.validate();
  return cfg;
}

json NormalizerConfig::to_json() const {
  json j;
  j["retained_ranges"] = json::array();
  for (auto [lo, hi] : retained_ranges) {
    j["retained_ranges"].push_back({cp_hex(lo), cp_hex(hi)});
  }
  j["letter_map"] = dump_map(letter_map);
  j["digit_map"] = dump_map(digit_map);
  j["strip_patterns"] = strip_patterns;
  return j;
}

void NormalizerConfig::validate() const {
  if (retained_ranges.empty()) {
    fail_config("normalizer config: retained_ranges must be non-empty");
  }
  for (auto [lo, hi] : retained_ranges) {
    if (lo > hi) fail_config("normalizer config: range lo > hi");
  }
  for (const auto* m : {&letter_map, &digit_map}) {
    std::set<char32_t> values;
    for (auto [from, to] : *m) {
      if (!values.insert(to).second) {
        fail_config("normalizer config: map is not injective at target U+" + cp_hex(to));
      }
      std::u32string one(1, to);
      if (nfkc(one) != one) {
        fail_config("normalizer config: map output U+" + cp_hex(to) +
                    " is not NFKC-stable");
      }
      if (!retained(to)) {
        fail_config("normalizer config: map output U+" + cp_hex(to) +
                    " is outside the retained ranges");
      }
      if (m->count(to) && m->at(to) != to) {
        fail_config("normalizer config: map chains at U+" + cp_hex(to));
      }
    }
  }
  for (const auto& p : strip_patterns) {
    try {
      std::regex re(p);
    } catch (const std::regex_error& e) {
      fail_config("normalizer config: bad strip pattern '" + p + "': " + e.what());
    }
  }
}

bool NormalizerConfig::retained(char32_t cp) const {
  for (auto [lo, hi] : retained_ranges) {
    if (cp >= lo && cp <= hi) return true;
  }
  return false;
}

Normalizer::Normalizer(NormalizerConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.validate();
  for (const auto& p : cfg_.strip_patterns) patterns_.emplace_back(p);
}

std::string Normalizer::pass(const std::string& text) const {
  std::string stripped = text;
  for (const auto& re : patterns_) {
    stripped = std::regex_replace(stripped, re, " ");
  }

  std::u32string cps = nfkc(decode_utf8(stripped));

  for (char32_t& cp : cps) {
    if (auto it = cfg_.letter_map.find(cp); it != cfg_.letter_map.end()) {
      cp = it->second;
    } else if (auto dit = cfg_.digit_map.find(cp); dit != cfg_.digit_map.end()) {
      cp = dit->second;
    }
  }

  std::u32string kept;
  kept.reserve(cps.size());
  bool pending_space = false;
  for (char32_t cp : cps) {
    if (is_space(cp)) {
      pending_space = !kept.empty();
      continue;
    }
    if (!cfg_.retained(cp)) continue;
    if (pending_space) {
      kept.push_back(U' ');
      pending_space = false;
    }
    kept.push_back(cp);
  }
  return encode_utf8(kept);
}

std::string Normalizer::normalize(std::string_view text) const {
  // Iterate to a fixpoint: removals can juxtapose characters that a fresh
  // pass would compose, strip or fold differently. Converges in 1-2 passes
  // for validated configs; the cap only guards pathological inputs.
  std::string current(text);
  for (int i = 0; i < 64; ++i) {
    std::string next = pass(current);
    if (next == current) return current;
    current = std::move(next);
  }
  return current;
}

}  // namespace embedkit::tok
