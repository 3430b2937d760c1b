#include "embedkit/pairmine/mine.hpp"

#include <algorithm>
#include <numeric>
#include <set>

#include "embedkit/common/errors.hpp"
#include "embedkit/common/parallel.hpp"

namespace embedkit::pairmine {

const char* task_kind_name(TaskKind k) {
  switch (k) {
    case TaskKind::retrieval: return "retrieval";
    case TaskKind::classification: return "classification";
    case TaskKind::sts: return "sts";
    case TaskKind::qa: return "qa";
    case TaskKind::nli: return "nli";
    case TaskKind::summarization: return "summarization";
    case TaskKind::q2q: return "q2q";
    case TaskKind::other: return "other";
  }
  return "?";
}

TaskKind task_kind_from(const std::string& name) {
  for (TaskKind k : {TaskKind::retrieval, TaskKind::classification, TaskKind::sts,
                     TaskKind::qa, TaskKind::nli, TaskKind::summarization,
                     TaskKind::q2q, TaskKind::other}) {
    if (name == task_kind_name(k)) return k;
  }
  fail_schema("unknown task_kind: " + name);
}

std::vector<RawPairSet> load_pair_sets(const std::vector<json>& records) {
  std::vector<RawPairSet> sets;
  std::map<std::string, std::size_t> index;
  for (const auto& r : records) {
    std::string subset = require_field(r, "subset_id", "pair record").get<std::string>();
    TaskKind kind =
        task_kind_from(require_field(r, "task_kind", "pair record").get<std::string>());
    auto it = index.find(subset);
    if (it == index.end()) {
      index[subset] = sets.size();
      sets.push_back({subset, kind, {}});
      it = index.find(subset);
    } else if (sets[it->second].task_kind != kind) {
      fail_schema("subset " + subset + " mixes task kinds");
    }
    sets[it->second].pairs.emplace_back(
        require_field(r, "query", "pair record").get<std::string>(),
        require_field(r, "positive", "pair record").get<std::string>());
  }
  return sets;
}

FilterOutcome score_and_filter(const RawPairSet& set, const SimilarityScorer& scorer,
                               const FilterPolicy& policy) {
  FilterOutcome out;
  out.kept.subset_id = set.subset_id;
  out.kept.task_kind = set.task_kind;

  if (!policy.fixed_threshold && set.pairs.size() < policy.min_pairs) {
    out.kept.pairs = set.pairs;
    out.skipped = true;
    return out;
  }

  auto scores = parallel_map(set.pairs.size(), [&](std::size_t i) {
    return cosine(scorer.embed(set.pairs[i].first), scorer.embed(set.pairs[i].second));
  });

  double threshold;
  if (policy.fixed_threshold) {
    threshold = *policy.fixed_threshold;
  } else {
    if (policy.quantile < 0.0 || policy.quantile >= 1.0) {
      fail_config("filter quantile must lie in [0, 1), got " +
                  std::to_string(policy.quantile));
    }
    std::vector<double> sorted = scores;
    std::sort(sorted.begin(), sorted.end());
    threshold = sorted[std::size_t(policy.quantile * double(sorted.size()))];
  }
  out.threshold = threshold;

  for (std::size_t i = 0; i < set.pairs.size(); ++i) {
    if (scores[i] >= threshold) {
      out.kept.pairs.push_back(set.pairs[i]);
    } else {
      ++out.removed;
    }
  }
  return out;
}

std::vector<RawPairSet> balance(const std::vector<RawPairSet>& sets,
                                const std::map<TaskKind, std::size_t>& quotas,
                                std::uint64_t seed) {
  // Global position of every pair, grouped by kind.
  std::map<TaskKind, std::vector<std::pair<std::size_t, std::size_t>>> members;
  for (std::size_t s = 0; s < sets.size(); ++s) {
    for (std::size_t p = 0; p < sets[s].pairs.size(); ++p) {
      members[sets[s].task_kind].push_back({s, p});
    }
  }

  std::vector<std::vector<bool>> keep(sets.size());
  for (std::size_t s = 0; s < sets.size(); ++s) {
    keep[s].assign(sets[s].pairs.size(), true);
  }

  for (auto& [kind, positions] : members) {
    auto it = quotas.find(kind);
    if (it == quotas.end()) continue;
    if (it->second == 0) fail_config("balance quota must be positive");
    if (positions.size() <= it->second) continue;
    Rng rng(derive_seed(seed, std::uint64_t(kind)));
    auto chosen = rng.sample_without_replacement(positions.size(), it->second);
    std::set<std::size_t> chosen_set(chosen.begin(), chosen.end());
    for (std::size_t i = 0; i < positions.size(); ++i) {
      if (!chosen_set.count(i)) keep[positions[i].first][positions[i].second] = false;
    }
  }

  std::vector<RawPairSet> out;
  for (std::size_t s = 0; s < sets.size(); ++s) {
    RawPairSet r;
    r.subset_id = sets[s].subset_id;
    r.task_kind = sets[s].task_kind;
    for (std::size_t p = 0; p < sets[s].pairs.size(); ++p) {
      if (keep[s][p]) r.pairs.push_back(sets[s].pairs[p]);
    }
    if (!r.pairs.empty()) out.push_back(std::move(r));
  }
  return out;
}

SimilarityIndex SimilarityIndex::build(std::vector<std::string> texts,
                                       const SimilarityScorer& scorer,
                                       unsigned threads) {
  if (texts.empty()) fail_data("similarity index needs a non-empty corpus");
  SimilarityIndex idx;
  idx.embeddings_ =
      parallel_map(texts.size(), [&](std::size_t i) { return scorer.embed(texts[i]); },
                   threads);
  idx.texts_ = std::move(texts);
  return idx;
}

std::vector<std::size_t> SimilarityIndex::rank_all(
    const std::vector<double>& query) const {
  std::vector<double> scores(size());
  for (std::size_t i = 0; i < size(); ++i) scores[i] = cosine(query, embeddings_[i]);
  std::vector<std::size_t> order(size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return a < b;
  });
  return order;
}

std::vector<std::size_t> SimilarityIndex::window(const std::vector<double>& query,
                                                 std::size_t k, std::size_t l) const {
  auto order = rank_all(query);
  if (l > order.size()) l = order.size();
  if (k >= l) return {};
  return std::vector<std::size_t>(order.begin() + long(k), order.begin() + long(l));
}

std::size_t SimilarityIndex::rank_of(const std::vector<double>& query,
                                     std::size_t doc) const {
  auto order = rank_all(query);
  for (std::size_t r = 0; r < order.size(); ++r) {
    if (order[r] == doc) return r + 1;
  }
  fail_data("document index out of range in rank_of");
}

std::pair<std::size_t, std::size_t> WindowConfig::resolve(
    const std::string& subset_id) const {
  if (auto it = per_subset.find(subset_id); it != per_subset.end()) return it->second;
  return {k, l};
}

const char* provenance_name(NegProvenance p) {
  switch (p) {
    case NegProvenance::in_dataset_hard: return "in_dataset_hard";
    case NegProvenance::cross_dataset_hard: return "cross_dataset_hard";
    case NegProvenance::random: return "random";
  }
  return "?";
}

json MinedExample::to_json() const {
  json j;
  j["query"] = query;
  j["positive"] = positive;
  j["negatives"] = json::array();
  for (const auto& n : negatives) {
    json jn;
    jn["text"] = n.text;
    jn["provenance"] = provenance_name(n.provenance);
    j["negatives"].push_back(std::move(jn));
  }
  j["task_kind"] = task_kind_name(task_kind);
  j["subset_id"] = subset_id;
  return j;
}

MinedExample MinedExample::from_json(const json& j) {
  MinedExample e;
  e.query = require_field(j, "query", "mined example").get<std::string>();
  e.positive = require_field(j, "positive", "mined example").get<std::string>();
  for (const auto& jn : require_field(j, "negatives", "mined example")) {
    std::string prov = require_field(jn, "provenance", "negative").get<std::string>();
    NegProvenance p;
    if (prov == "in_dataset_hard") p = NegProvenance::in_dataset_hard;
    else if (prov == "cross_dataset_hard") p = NegProvenance::cross_dataset_hard;
    else if (prov == "random") p = NegProvenance::random;
    else fail_schema("unknown negative provenance: " + prov);
    e.negatives.push_back({require_field(jn, "text", "negative").get<std::string>(), p});
  }
  e.task_kind =
      task_kind_from(require_field(j, "task_kind", "mined example").get<std::string>());
  e.subset_id = require_field(j, "subset_id", "mined example").get<std::string>();
  return e;
}

namespace {

// Uniform draw of `need` distinct texts from the ranked window, skipping the
// positive and anything already taken.
void draw_from_window(const SimilarityIndex& index,
                      const std::vector<std::size_t>& window_docs,
                      const std::string& positive, std::size_t need,
                      NegProvenance provenance, Rng& rng,
                      std::set<std::string>& taken, const std::string& subset,
                      std::vector<MinedNegative>& out) {
  std::vector<std::string> candidates;
  std::set<std::string> seen;
  for (std::size_t doc : window_docs) {
    const std::string& t = index.text(doc);
    if (t == positive || taken.count(t) || seen.count(t)) continue;
    seen.insert(t);
    candidates.push_back(t);
  }
  if (candidates.size() < need) {
    fail_data("negative mining: subset " + subset + " window holds " +
              std::to_string(candidates.size()) + " distinct candidates, need " +
              std::to_string(need));
  }
  auto picks = rng.sample_without_replacement(candidates.size(), need);
  for (std::size_t p : picks) {
    taken.insert(candidates[p]);
    out.push_back({candidates[p], provenance});
  }
}

}  // namespace

MinedExample mine_negatives(const std::string& query, const std::string& positive,
                            const SimilarityIndex& in_set_index,
                            const SimilarityIndex& global_index,
                            const std::vector<std::string>& rand_pool,
                            std::size_t k, std::size_t l,
                            const SimilarityScorer& scorer, Rng& rng) {
  if (k >= l) fail_config("window requires K < L, got K=" + std::to_string(k) +
                          " L=" + std::to_string(l));
  for (const auto* idx : {&in_set_index, &global_index}) {
    if (idx->size() < l) {
      fail_data("negative mining: index of " + std::to_string(idx->size()) +
                " documents is smaller than L=" + std::to_string(l));
    }
  }

  MinedExample ex;
  ex.query = query;
  ex.positive = positive;

  auto q_emb = scorer.embed(query);
  std::set<std::string> taken;
  draw_from_window(in_set_index, in_set_index.window(q_emb, k, l), positive, 3,
                   NegProvenance::in_dataset_hard, rng, taken, "in_set", ex.negatives);
  draw_from_window(global_index, global_index.window(q_emb, k, l), positive, 3,
                   NegProvenance::cross_dataset_hard, rng, taken, "global",
                   ex.negatives);

  std::size_t usable = 0;
  for (const auto& t : rand_pool) {
    if (t != positive && !taken.count(t)) ++usable;
  }
  if (usable < 3) fail_data("negative mining: random pool exhausted");
  for (int drawn = 0; drawn < 3;) {
    const std::string& t = rand_pool[rng.uniform_int(rand_pool.size())];
    if (t == positive || taken.count(t)) continue;
    taken.insert(t);
    ex.negatives.push_back({t, NegProvenance::random});
    ++drawn;
  }
  return ex;
}

std::vector<MinedExample> mine_all(const std::vector<RawPairSet>& sets,
                                   const SimilarityScorer& scorer,
                                   const WindowConfig& cfg, std::uint64_t seed) {
  std::vector<std::string> all_positives;
  for (const auto& s : sets) {
    for (const auto& [q, p] : s.pairs) all_positives.push_back(p);
  }
  auto global_index = SimilarityIndex::build(all_positives, scorer);

  std::vector<MinedExample> out;
  std::uint64_t example_counter = 0;
  for (const auto& s : sets) {
    std::vector<std::string> subset_positives;
    subset_positives.reserve(s.pairs.size());
    for (const auto& [q, p] : s.pairs) subset_positives.push_back(p);
    auto [k, l] = cfg.resolve(s.subset_id);
    if (subset_positives.size() < l) {
      fail_data("negative mining: subset " + s.subset_id + " has " +
                std::to_string(subset_positives.size()) +
                " documents, below L=" + std::to_string(l));
    }
    auto in_set_index = SimilarityIndex::build(subset_positives, scorer);

    for (const auto& [q, p] : s.pairs) {
      Rng rng(derive_seed(seed, example_counter++));
      MinedExample ex =
          mine_negatives(q, p, in_set_index, global_index, all_positives, k, l,
                         scorer, rng);
      ex.task_kind = s.task_kind;
      ex.subset_id = s.subset_id;
      out.push_back(std::move(ex));
    }
  }
  return out;
}

}  // namespace embedkit::pairmine
