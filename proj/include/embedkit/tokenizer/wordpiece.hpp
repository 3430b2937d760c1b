#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace embedkit::tok {

// Whitespace split with punctuation characters broken out as single-char
// words; shared by the trainer and the encoder.
std::vector<std::string> pretokenize(std::string_view text);

class WordPieceVocab {
public:
  static constexpr int kPad = 0;
  static constexpr int kUnk = 1;
  static constexpr int kCls = 2;
  static constexpr int kSep = 3;
  static constexpr int kMask = 4;
  static const std::vector<std::string>& special_tokens();

  static WordPieceVocab from_tokens(std::vector<std::string> tokens);

  std::size_t size() const { return tokens_.size(); }
  const std::string& token(int id) const;
  int id(std::string_view token) const;  // -1 if absent
  bool contains(std::string_view token) const { return id(token) >= 0; }
  const std::vector<std::string>& tokens() const { return tokens_; }

  // One token per line, UTF-8, line number = id (see docs/formats.md).
  void save(const std::filesystem::path& path) const;
  static WordPieceVocab load(const std::filesystem::path& path);

private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> ids_;
};

struct WordPieceTrainConfig {
  std::size_t target_size = 50000;
  std::size_t max_word_chars = 100;
  std::size_t min_pair_count = 2;
};

// Likelihood-scored greedy merge training: the pair maximizing
// count(ab) / (count(a) * count(b)) merges each round, ties broken
// lexicographically, until the vocabulary reaches target_size or no pair
// clears min_pair_count. Inputs are expected to be normalizer-clean.
WordPieceVocab train_wordpiece(const std::vector<std::string>& corpus,
                               const WordPieceTrainConfig& cfg = {});

struct TokenSpan {
  std::size_t begin = 0;  // codepoint offsets into the normalized text
  std::size_t end = 0;
};

struct TokenSequence {
  std::vector<int> ids;
  std::vector<TokenSpan> offsets;
};

// Greedy longest-prefix segmentation per word; a word with no full
// segmentation (or longer than max_word_chars) becomes a single [UNK].
TokenSequence encode(std::string_view text, const WordPieceVocab& vocab,
                     std::size_t max_word_chars = 100);

// Inverse of encode modulo [UNK]: strips "##", drops specials, joins words
// with single spaces.
std::string decode(const std::vector<int>& ids, const WordPieceVocab& vocab);

}  // namespace embedkit::tok
