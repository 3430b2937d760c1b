#include "embedkit/tokenizer/wordpiece.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>

#include "embedkit/common/errors.hpp"
#include "embedkit/common/jsonl.hpp"
#include "embedkit/common/utf8.hpp"
#include "embedkit/tokenizer/chartypes.hpp"

namespace embedkit::tok {

std::vector<std::string> pretokenize(std::string_view text) {
  std::u32string cps = decode_utf8(text);
  std::vector<std::string> words;
  std::u32string current;
  auto flush = [&]() {
    if (!current.empty()) {
      words.push_back(encode_utf8(current));
      current.clear();
    }
  };
  for (char32_t cp : cps) {
    if (is_space(cp)) {
      flush();
    } else if (is_punct(cp)) {
      flush();
      words.push_back(encode_utf8(std::u32string(1, cp)));
    } else {
      current.push_back(cp);
    }
  }
  flush();
  return words;
}

const std::vector<std::string>& WordPieceVocab::special_tokens() {
  static const std::vector<std::string> specials = {"[PAD]", "[UNK]", "[CLS]",
                                                    "[SEP]", "[MASK]"};
  return specials;
}

WordPieceVocab WordPieceVocab::from_tokens(std::vector<std::string> tokens) {
  WordPieceVocab v;
  v.tokens_ = std::move(tokens);
  const auto& specials = special_tokens();
  if (v.tokens_.size() < specials.size()) {
    fail_data("vocab too small to hold the special tokens");
  }
  for (std::size_t i = 0; i < specials.size(); ++i) {
    if (v.tokens_[i] != specials[i]) {
      fail_data("vocab special token mismatch at id " + std::to_string(i) +
                ": expected " + specials[i] + ", got " + v.tokens_[i]);
    }
  }
  for (std::size_t i = 0; i < v.tokens_.size(); ++i) {
    if (!v.ids_.emplace(v.tokens_[i], int(i)).second) {
      fail_data("duplicate vocab token: " + v.tokens_[i]);
    }
  }
  return v;
}

const std::string& WordPieceVocab::token(int id) const {
  if (id < 0 || std::size_t(id) >= tokens_.size()) {
    fail_data("token id " + std::to_string(id) + " out of range for vocab of " +
              std::to_string(tokens_.size()));
  }
  return tokens_[std::size_t(id)];
}

int WordPieceVocab::id(std::string_view token) const {
  auto it = ids_.find(std::string(token));
  return it == ids_.end() ? -1 : it->second;
}

void WordPieceVocab::save(const std::filesystem::path& path) const {
  std::string buf;
  for (const auto& t : tokens_) {
    buf += t;
    buf += '\n';
  }
  atomic_write_file(path, buf);
}

WordPieceVocab WordPieceVocab::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::missing_input, "cannot open vocab file: " + path.string());
  std::vector<std::string> tokens;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    tokens.push_back(line);
  }
  while (!tokens.empty() && tokens.back().empty()) tokens.pop_back();
  return from_tokens(std::move(tokens));
}

namespace {

struct SymbolWord {
  std::vector<std::string> symbols;
  std::size_t count = 0;
};

std::string merge_symbol(const std::string& a, const std::string& b) {
  return a + (b.rfind("##", 0) == 0 ? b.substr(2) : b);
}

}  // namespace

WordPieceVocab train_wordpiece(const std::vector<std::string>& corpus,
                               const WordPieceTrainConfig& cfg) {
  std::map<std::string, std::size_t> word_counts;
  for (const auto& line : corpus) {
    for (auto& w : pretokenize(line)) ++word_counts[w];
  }
  if (word_counts.empty()) fail_data("wordpiece training corpus is empty");

  // Alphabet: every observed character in the positional form it was seen
  // in (word-initial bare, continuation with "##").
  std::set<std::string> alphabet;
  std::vector<SymbolWord> words;
  words.reserve(word_counts.size());
  for (const auto& [word, count] : word_counts) {
    std::u32string cps = decode_utf8(word);
    if (cps.size() > cfg.max_word_chars) continue;  // encoded as [UNK] anyway
    SymbolWord sw;
    sw.count = count;
    for (std::size_t i = 0; i < cps.size(); ++i) {
      std::string sym = i == 0 ? "" : "##";
      append_utf8(sym, cps[i]);
      alphabet.insert(sym);
      sw.symbols.push_back(std::move(sym));
    }
    words.push_back(std::move(sw));
  }

  const auto& specials = WordPieceVocab::special_tokens();
  if (specials.size() + alphabet.size() > cfg.target_size) {
    fail_config("wordpiece target_size " + std::to_string(cfg.target_size) +
                " cannot hold " + std::to_string(alphabet.size()) +
                " alphabet tokens plus specials");
  }

  std::vector<std::string> tokens(specials.begin(), specials.end());
  tokens.insert(tokens.end(), alphabet.begin(), alphabet.end());
  std::set<std::string> seen(tokens.begin(), tokens.end());

  while (tokens.size() < cfg.target_size) {
    // Pair statistics are recounted per round; corpora here are desk-scale.
    std::map<std::string, std::size_t> sym_counts;
    std::map<std::pair<std::string, std::string>, std::size_t> pair_counts;
    for (const auto& w : words) {
      for (std::size_t i = 0; i < w.symbols.size(); ++i) {
        sym_counts[w.symbols[i]] += w.count;
        if (i + 1 < w.symbols.size()) {
          pair_counts[{w.symbols[i], w.symbols[i + 1]}] += w.count;
        }
      }
    }

    // Likelihood score count(ab)/(count(a)*count(b)), compared exactly via
    // cross-multiplication; ties fall to the lexicographically first pair.
    const std::pair<std::string, std::string>* best = nullptr;
    std::size_t best_num = 0, best_den = 1;
    for (const auto& [pair, num] : pair_counts) {
      if (num < cfg.min_pair_count) continue;
      std::size_t den = sym_counts[pair.first] * sym_counts[pair.second];
      if (!best) {
        best = &pair;
        best_num = num;
        best_den = den;
        continue;
      }
      __int128 lhs = static_cast<__int128>(num) * best_den;
      __int128 rhs = static_cast<__int128>(best_num) * den;
      if (lhs > rhs) {
        best = &pair;
        best_num = num;
        best_den = den;
      }
    }
    if (!best) break;

    const std::string merged = merge_symbol(best->first, best->second);
    const std::string a = best->first, b = best->second;
    for (auto& w : words) {
      for (std::size_t i = 0; i + 1 < w.symbols.size();) {
        if (w.symbols[i] == a && w.symbols[i + 1] == b) {
          w.symbols[i] = merged;
          w.symbols.erase(w.symbols.begin() + long(i + 1));
        } else {
          ++i;
        }
      }
    }
    if (seen.insert(merged).second) tokens.push_back(merged);
  }

  return WordPieceVocab::from_tokens(std::move(tokens));
}

TokenSequence encode(std::string_view text, const WordPieceVocab& vocab,
                     std::size_t max_word_chars) {
  TokenSequence out;
  std::u32string cps = decode_utf8(text);

  std::size_t i = 0;
  while (i < cps.size()) {
    if (is_space(cps[i])) {
      ++i;
      continue;
    }
    // Word boundary: punctuation is its own word, as in pretokenize().
    std::size_t start = i;
    std::size_t end;
    if (is_punct(cps[i])) {
      end = i + 1;
    } else {
      end = i;
      while (end < cps.size() && !is_space(cps[end]) && !is_punct(cps[end])) ++end;
    }
    i = end;

    const std::size_t word_len = end - start;
    if (word_len > max_word_chars) {
      out.ids.push_back(WordPieceVocab::kUnk);
      out.offsets.push_back({start, end});
      continue;
    }

    std::vector<int> word_ids;
    std::vector<TokenSpan> word_spans;
    std::size_t pos = start;
    bool ok = true;
    while (pos < end) {
      std::size_t best_len = 0;
      int best_id = -1;
      std::string candidate = pos == start ? "" : "##";
      const std::size_t prefix = candidate.size();
      for (std::size_t take = 1; take <= end - pos; ++take) {
        candidate.resize(prefix);
        for (std::size_t k = 0; k < take; ++k) {
          append_utf8(candidate, cps[pos + k]);
        }
        int id = vocab.id(candidate);
        if (id >= 0) {
          best_len = take;
          best_id = id;
        }
      }
      if (best_id < 0) {
        ok = false;
        break;
      }
      word_ids.push_back(best_id);
      word_spans.push_back({pos, pos + best_len});
      pos += best_len;
    }
    if (!ok) {
      out.ids.push_back(WordPieceVocab::kUnk);
      out.offsets.push_back({start, end});
    } else {
      out.ids.insert(out.ids.end(), word_ids.begin(), word_ids.end());
      out.offsets.insert(out.offsets.end(), word_spans.begin(), word_spans.end());
    }
  }
  return out;
}

std::string decode(const std::vector<int>& ids, const WordPieceVocab& vocab) {
  std::string out;
  for (int id : ids) {
    const std::string& t = vocab.token(id);  // validates the id range
    if (id <= WordPieceVocab::kMask) continue;
    if (t.rfind("##", 0) == 0) {
      out += t.substr(2);
    } else {
      if (!out.empty()) out += ' ';
      out += t;
    }
  }
  return out;
}

}  // namespace embedkit::tok
