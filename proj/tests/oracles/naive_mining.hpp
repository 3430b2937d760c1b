#pragma once

// Brute-force re-implementation of the rank-window semantics used to audit
// mined negatives: embeddings are recomputed, every candidate is scored with
// a plain O(n^2)-style pass, and ranks come from an explicit insertion sort.

#include <set>
#include <string>
#include <vector>

#include "embedkit/pairmine/mine.hpp"

namespace oracles {

inline double naive_cos(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// Texts at ranks (k, l] for the query against the corpus, ties by index.
inline std::set<std::string> naive_window_texts(
    const std::string& query, const std::vector<std::string>& corpus,
    const embedkit::pairmine::SimilarityScorer& scorer, std::size_t k,
    std::size_t l) {
  auto q = scorer.embed(query);
  struct Scored {
    double score;
    std::size_t idx;
  };
  std::vector<Scored> ranked;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    Scored s{naive_cos(q, scorer.embed(corpus[i])), i};
    // insertion sort: descending score, ascending index on ties
    std::size_t pos = 0;
    while (pos < ranked.size() &&
           (ranked[pos].score > s.score ||
            (ranked[pos].score == s.score && ranked[pos].idx < s.idx))) {
      ++pos;
    }
    ranked.insert(ranked.begin() + long(pos), s);
  }
  std::set<std::string> out;
  for (std::size_t r = k; r < l && r < ranked.size(); ++r) {
    out.insert(corpus[ranked[r].idx]);
  }
  return out;
}

}  // namespace oracles
