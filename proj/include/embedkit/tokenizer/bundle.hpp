#pragma once

#include <string>
#include <vector>

#include "embedkit/tokenizer/normalizer.hpp"
#include "embedkit/tokenizer/wordpiece.hpp"

namespace embedkit::tok {

// Normalizer + vocabulary as one unit: the text-to-ids path every model
// component uses.
struct TokenizerBundle {
  Normalizer normalizer;
  WordPieceVocab vocab;

  TokenizerBundle(NormalizerConfig cfg, WordPieceVocab v)
      : normalizer(std::move(cfg)), vocab(std::move(v)) {}

  std::vector<int> encode_ids(const std::string& text) const {
    return encode(normalizer.normalize(text), vocab).ids;
  }

  // [CLS] ids... [SEP], truncated so the frame fits max_len.
  std::vector<int> frame(std::vector<int> ids, std::size_t max_len) const {
    if (max_len < 2) fail_config("frame: max_len must be at least 2");
    if (ids.size() > max_len - 2) ids.resize(max_len - 2);
    std::vector<int> out;
    out.reserve(ids.size() + 2);
    out.push_back(WordPieceVocab::kCls);
    out.insert(out.end(), ids.begin(), ids.end());
    out.push_back(WordPieceVocab::kSep);
    return out;
  }

  std::vector<int> framed_ids(const std::string& text, std::size_t max_len) const {
    return frame(encode_ids(text), max_len);
  }

  std::size_t count_tokens(const std::string& text) const {
    return encode_ids(text).size();
  }
};

}  // namespace embedkit::tok
