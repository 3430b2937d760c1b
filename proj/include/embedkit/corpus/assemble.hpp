#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "embedkit/common/jsonl.hpp"
#include "embedkit/corpus/document.hpp"

namespace embedkit::corpus {

using TokenCounter = std::function<std::size_t(const std::string&)>;

struct AssembleConfig {
  std::size_t token_limit = 256;
  double merge_fraction = 0.9;      // pages entering the merge pool
  double heading_keep_prob = 0.5;   // merged samples retaining headings
  double overlimit_prob = 0.1;      // merged samples allowed past the limit
  double overlimit_factor = 1.25;   // "slightly exceed" bound
  std::uint64_t seed = 42;
};

struct PretrainSample {
  std::string text;
  std::vector<std::string> merged_from;
  bool kept_headings = false;
  bool over_limit = false;

  json to_json() const;
  static PretrainSample from_json(const json& j);
};

struct AssembleStats {
  std::size_t total_docs = 0;
  std::size_t merged_docs = 0;     // entered the merge pool
  std::size_t separate_docs = 0;
  std::size_t merged_samples = 0;
  std::size_t kept_heading_samples = 0;  // among merged samples
  std::size_t over_limit_samples = 0;    // among merged samples
};

struct AssembleResult {
  std::vector<PretrainSample> samples;
  AssembleStats stats;
};

// Seeded single-pass assembly: per category (sorted), documents are shuffled
// and routed 90/10 to merge-pool vs paragraph-per-sample; merged samples
// draw heading retention and an over-limit permit, fill greedily to their
// limit, and are flagged when they actually exceed token_limit.
AssembleResult assemble_pretrain_samples(const std::vector<StructuredDocument>& docs,
                                         const AssembleConfig& cfg,
                                         const TokenCounter& count_tokens);

// Splits an over-limit sample at paragraph ("\n") boundaries into chunks of
// at most token_limit tokens; a single over-long paragraph stays intact.
std::vector<std::string> split_sample_text(const std::string& text,
                                           std::size_t token_limit,
                                           const TokenCounter& count_tokens);

// Lines above the token threshold pass through; shorter lines are packed
// greedily (joined with newlines) until adding the next would exceed
// capacity.
std::vector<std::string> group_short_texts(const std::vector<std::string>& lines,
                                           const TokenCounter& count_tokens,
                                           std::size_t threshold = 100,
                                           std::size_t capacity = 512);

}  // namespace embedkit::corpus
