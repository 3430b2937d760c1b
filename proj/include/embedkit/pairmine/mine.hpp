#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "embedkit/common/jsonl.hpp"
#include "embedkit/common/rng.hpp"
#include "embedkit/pairmine/scorer.hpp"

namespace embedkit::pairmine {

enum class TaskKind { retrieval, classification, sts, qa, nli, summarization, q2q, other };

const char* task_kind_name(TaskKind k);
TaskKind task_kind_from(const std::string& name);

struct RawPairSet {
  std::string subset_id;
  TaskKind task_kind = TaskKind::other;
  std::vector<std::pair<std::string, std::string>> pairs;  // (query, positive)
};

// Groups pair records (query/positive/task_kind/subset_id) into subsets.
std::vector<RawPairSet> load_pair_sets(const std::vector<json>& records);

struct FilterPolicy {
  double quantile = 0.2;                  // keep pairs >= the q-quantile score
  std::optional<double> fixed_threshold;  // overrides the quantile when set
  std::size_t min_pairs = 10;             // smaller subsets pass through
};

struct FilterOutcome {
  RawPairSet kept;
  std::size_t removed = 0;
  double threshold = 0.0;
  bool skipped = false;  // subset too small, passed through with a warning
};

FilterOutcome score_and_filter(const RawPairSet& set, const SimilarityScorer& scorer,
                               const FilterPolicy& policy);

// Seeded uniform downsampling of each task kind to its quota; kinds under
// quota are untouched, nothing is ever upsampled.
std::vector<RawPairSet> balance(const std::vector<RawPairSet>& sets,
                                const std::map<TaskKind, std::size_t>& quotas,
                                std::uint64_t seed);

// Exact brute-force cosine index over unit embeddings; ranking ties break by
// document id, so every query induces a total order.
class SimilarityIndex {
public:
  static SimilarityIndex build(std::vector<std::string> texts,
                               const SimilarityScorer& scorer,
                               unsigned threads = 0);

  std::size_t size() const { return texts_.size(); }
  const std::string& text(std::size_t i) const { return texts_[i]; }

  // All document indices ordered by descending cosine (rank 1 first).
  std::vector<std::size_t> rank_all(const std::vector<double>& query) const;
  // Documents at ranks (k, l], i.e. ranks k+1..l inclusive, 1-based.
  std::vector<std::size_t> window(const std::vector<double>& query, std::size_t k,
                                  std::size_t l) const;
  // 1-based rank of a document for a query.
  std::size_t rank_of(const std::vector<double>& query, std::size_t doc) const;

private:
  std::vector<std::string> texts_;
  std::vector<std::vector<double>> embeddings_;
};

struct WindowConfig {
  std::size_t k = 5;  // top-k discarded as likely false negatives
  std::size_t l = 50; // upper candidate bound
  std::map<std::string, std::pair<std::size_t, std::size_t>> per_subset;

  std::pair<std::size_t, std::size_t> resolve(const std::string& subset_id) const;
};

enum class NegProvenance { in_dataset_hard, cross_dataset_hard, random };
const char* provenance_name(NegProvenance p);

struct MinedNegative {
  std::string text;
  NegProvenance provenance;
};

struct MinedExample {
  std::string query;
  std::string positive;
  std::vector<MinedNegative> negatives;  // exactly 9, 3 per provenance
  TaskKind task_kind = TaskKind::other;
  std::string subset_id;

  json to_json() const;
  static MinedExample from_json(const json& j);
};

// Draws 3 in-subset hard negatives and 3 cross-dataset hard negatives
// uniformly from the (k, l] rank windows, plus 3 uniform random negatives;
// the positive is excluded everywhere and all nine texts are distinct.
MinedExample mine_negatives(const std::string& query, const std::string& positive,
                            const SimilarityIndex& in_set_index,
                            const SimilarityIndex& global_index,
                            const std::vector<std::string>& rand_pool,
                            std::size_t k, std::size_t l,
                            const SimilarityScorer& scorer, Rng& rng);

// Full mining pass: per-subset indexes plus one global index over all
// positives; examples keep subset order, randomness derives from seed.
std::vector<MinedExample> mine_all(const std::vector<RawPairSet>& sets,
                                   const SimilarityScorer& scorer,
                                   const WindowConfig& cfg, std::uint64_t seed);

}  // namespace embedkit::pairmine
