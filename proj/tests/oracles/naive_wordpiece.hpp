#pragma once

// Deliberately simple re-implementation of likelihood-scored WordPiece
// training, used as a reference for the production trainer. Every word
// occurrence is kept separately and statistics are recomputed from scratch
// each round; only the tie-break and scoring rules are shared semantics.

#include <string>
#include <vector>

#include "embedkit/common/utf8.hpp"
#include "embedkit/tokenizer/chartypes.hpp"
#include "embedkit/tokenizer/wordpiece.hpp"

namespace oracles {

inline std::vector<std::string> naive_wordpiece_train(
    const std::vector<std::string>& corpus, std::size_t target_size,
    std::size_t max_word_chars = 100, std::size_t min_pair_count = 2) {
  using embedkit::decode_utf8;
  using embedkit::encode_utf8;

  // Split every line into words (whitespace; punctuation stands alone).
  std::vector<std::vector<std::string>> occurrences;
  for (const auto& line : corpus) {
    std::u32string cps = decode_utf8(line);
    std::vector<std::u32string> raw_words;
    std::u32string cur;
    for (char32_t cp : cps) {
      if (embedkit::tok::is_space(cp)) {
        if (!cur.empty()) raw_words.push_back(cur), cur.clear();
      } else if (embedkit::tok::is_punct(cp)) {
        if (!cur.empty()) raw_words.push_back(cur), cur.clear();
        raw_words.push_back(std::u32string(1, cp));
      } else {
        cur.push_back(cp);
      }
    }
    if (!cur.empty()) raw_words.push_back(cur);

    for (const auto& w : raw_words) {
      if (w.size() > max_word_chars) continue;
      std::vector<std::string> syms;
      for (std::size_t i = 0; i < w.size(); ++i) {
        std::string s = i == 0 ? "" : "##";
        embedkit::append_utf8(s, w[i]);
        syms.push_back(s);
      }
      occurrences.push_back(syms);
    }
  }

  std::vector<std::string> vocab = {"[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]"};
  {
    std::vector<std::string> alpha;
    for (const auto& occ : occurrences) {
      for (const auto& s : occ) alpha.push_back(s);
    }
    std::sort(alpha.begin(), alpha.end());
    alpha.erase(std::unique(alpha.begin(), alpha.end()), alpha.end());
    vocab.insert(vocab.end(), alpha.begin(), alpha.end());
  }

  auto in_vocab = [&](const std::string& t) {
    for (const auto& v : vocab) {
      if (v == t) return true;
    }
    return false;
  };

  while (vocab.size() < target_size) {
    std::vector<std::pair<std::string, std::size_t>> sym_counts;
    std::vector<std::pair<std::pair<std::string, std::string>, std::size_t>> pair_counts;
    auto bump_sym = [&](const std::string& s) {
      for (auto& [k, c] : sym_counts) {
        if (k == s) {
          ++c;
          return;
        }
      }
      sym_counts.push_back({s, 1});
    };
    auto bump_pair = [&](const std::string& a, const std::string& b) {
      for (auto& [k, c] : pair_counts) {
        if (k.first == a && k.second == b) {
          ++c;
          return;
        }
      }
      pair_counts.push_back({{a, b}, 1});
    };
    for (const auto& occ : occurrences) {
      for (std::size_t i = 0; i < occ.size(); ++i) {
        bump_sym(occ[i]);
        if (i + 1 < occ.size()) bump_pair(occ[i], occ[i + 1]);
      }
    }
    auto count_of = [&](const std::string& s) -> std::size_t {
      for (const auto& [k, c] : sym_counts) {
        if (k == s) return c;
      }
      return 0;
    };

    bool found = false;
    std::pair<std::string, std::string> best;
    std::size_t best_num = 0, best_den = 1;
    for (const auto& [pair, num] : pair_counts) {
      if (num < min_pair_count) continue;
      std::size_t den = count_of(pair.first) * count_of(pair.second);
      bool better;
      if (!found) {
        better = true;
      } else {
        __int128 lhs = static_cast<__int128>(num) * best_den;
        __int128 rhs = static_cast<__int128>(best_num) * den;
        better = lhs > rhs || (lhs == rhs && pair < best);
      }
      if (better) {
        found = true;
        best = pair;
        best_num = num;
        best_den = den;
      }
    }
    if (!found) break;

    std::string merged =
        best.first +
        (best.second.rfind("##", 0) == 0 ? best.second.substr(2) : best.second);
    for (auto& occ : occurrences) {
      std::vector<std::string> next;
      std::size_t i = 0;
      while (i < occ.size()) {
        if (i + 1 < occ.size() && occ[i] == best.first && occ[i + 1] == best.second) {
          next.push_back(merged);
          i += 2;
        } else {
          next.push_back(occ[i]);
          i += 1;
        }
      }
      occ = next;
    }
    if (!in_vocab(merged)) vocab.push_back(merged);
  }
  return vocab;
}

}  // namespace oracles
