#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "embedkit/common/errors.hpp"
#include "embedkit/pairmine/mine.hpp"
#include "embedkit/pairmine/scorer.hpp"
#include "oracles/naive_mining.hpp"

using namespace embedkit;
using namespace embedkit::pairmine;

namespace {

std::string synth_text(Rng& rng, int topic, std::size_t words = 8) {
  static const char* kWords[] = {"kipo", "zuma", "relt", "havo", "nix",  "tor",
                                 "bal",  "wemu", "sera", "lomi", "datu", "pex"};
  std::string out = "t" + std::to_string(topic);
  for (std::size_t i = 0; i < words; ++i) {
    out += ' ';
    out += kWords[rng.uniform_int(std::size(kWords))];
    out += std::to_string(topic % 7);
  }
  return out;
}

RawPairSet make_set(const std::string& id, TaskKind kind, std::size_t n,
                    std::uint64_t seed) {
  Rng rng(seed);
  RawPairSet s{id, kind, {}};
  for (std::size_t i = 0; i < n; ++i) {
    int topic = int(seed % 100) * 1000 + int(i);
    s.pairs.emplace_back(synth_text(rng, topic, 5), synth_text(rng, topic, 9));
  }
  return s;
}

}  // namespace

TEST_CASE("hash scorer embeds deterministically onto the unit sphere") {
  HashProjectionScorer scorer(256);
  auto a = scorer.embed("some words here");
  auto b = scorer.embed("some words here");
  CHECK(a == b);
  double norm = 0;
  for (double v : a) norm += v * v;
  CHECK(norm == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(cosine(a, a) == doctest::Approx(1.0).epsilon(1e-12));
  auto c = scorer.embed("totally different tokens");
  CHECK(std::abs(cosine(a, c)) < 0.4);
}

TEST_CASE("filter keeps everything when all scores are equal") {
  RawPairSet set{"s", TaskKind::retrieval, {}};
  for (int i = 0; i < 50; ++i) set.pairs.emplace_back("same text", "same text");
  HashProjectionScorer scorer;
  auto out = score_and_filter(set, scorer, {});
  CHECK(out.removed == 0);
  CHECK(out.kept.pairs.size() == 50);
}

TEST_CASE("planted corpus: exactly the misaligned pairs are removed") {
  Rng rng(11);
  RawPairSet set{"planted", TaskKind::retrieval, {}};
  for (int i = 0; i < 80; ++i) {
    auto text = synth_text(rng, i);
    set.pairs.emplace_back(text, text);  // aligned: score 1
  }
  for (int i = 0; i < 20; ++i) {
    set.pairs.emplace_back(synth_text(rng, 500 + i), synth_text(rng, 900 + i));
  }
  HashProjectionScorer scorer;
  auto out = score_and_filter(set, scorer, {.quantile = 0.2});
  CHECK(out.removed == 20);
  REQUIRE(out.kept.pairs.size() == 80);
  for (const auto& [q, p] : out.kept.pairs) CHECK(q == p);

  SUBCASE("idempotent at the fixed threshold") {
    FilterPolicy fixed;
    fixed.fixed_threshold = out.threshold;
    auto again = score_and_filter(out.kept, scorer, fixed);
    CHECK(again.removed == 0);
    CHECK(again.kept.pairs.size() == out.kept.pairs.size());
  }
}

TEST_CASE("small subsets pass through with a warning") {
  auto set = make_set("tiny", TaskKind::sts, 5, 3);
  HashProjectionScorer scorer;
  auto out = score_and_filter(set, scorer, {});
  CHECK(out.skipped);
  CHECK(out.kept.pairs.size() == 5);
}

TEST_CASE("balance downsamples to quota without upsampling") {
  std::vector<RawPairSet> sets = {make_set("a", TaskKind::retrieval, 150, 1),
                                  make_set("b", TaskKind::retrieval, 100, 2),
                                  make_set("c", TaskKind::sts, 50, 3)};
  std::map<TaskKind, std::size_t> quotas = {{TaskKind::retrieval, 100},
                                            {TaskKind::sts, 100}};
  auto out = balance(sets, quotas, 42);
  std::size_t retrieval = 0, sts = 0;
  for (const auto& s : out) {
    if (s.task_kind == TaskKind::retrieval) retrieval += s.pairs.size();
    if (s.task_kind == TaskKind::sts) sts += s.pairs.size();
  }
  CHECK(retrieval == 100);
  CHECK(sts == 50);  // under quota: untouched

  SUBCASE("selection is a subset of the original") {
    std::set<std::string> original;
    for (const auto& s : sets) {
      for (const auto& [q, p] : s.pairs) original.insert(q + "|" + p);
    }
    for (const auto& s : out) {
      for (const auto& [q, p] : s.pairs) CHECK(original.count(q + "|" + p) == 1);
    }
  }
  SUBCASE("same seed, same selection") {
    auto out2 = balance(sets, quotas, 42);
    REQUIRE(out.size() == out2.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
      CHECK(out[i].pairs == out2[i].pairs);
    }
  }
}

TEST_CASE("index ranks an exact duplicate first") {
  HashProjectionScorer scorer;
  std::vector<std::string> corpus = {"alpha beta", "gamma delta", "epsilon zeta"};
  auto idx = SimilarityIndex::build(corpus, scorer);
  auto order = idx.rank_all(scorer.embed("gamma delta"));
  CHECK(order[0] == 1);
  CHECK(idx.rank_of(scorer.embed("gamma delta"), 1) == 1);
}

TEST_CASE("index of size one ranks its only document first") {
  HashProjectionScorer scorer;
  auto idx = SimilarityIndex::build({"lonely doc"}, scorer);
  CHECK(idx.rank_all(scorer.embed("anything at all"))[0] == 0);
}

TEST_CASE("index ranking agrees with an independent similarity sort") {
  HashProjectionScorer scorer;
  Rng rng(7);
  std::vector<std::string> corpus;
  for (int i = 0; i < 60; ++i) corpus.push_back(synth_text(rng, i % 10));
  auto idx = SimilarityIndex::build(corpus, scorer);
  for (int t = 0; t < 10; ++t) {
    std::string query = synth_text(rng, t);
    auto order = idx.rank_all(scorer.embed(query));
    auto window_all =
        oracles::naive_window_texts(query, corpus, scorer, 0, corpus.size());
    // full window equals the whole corpus as a set
    CHECK(window_all.size() <= corpus.size());
    // spot-check: the top-ranked text is in the top-1 naive window
    auto top1 = oracles::naive_window_texts(query, corpus, scorer, 0, 1);
    CHECK(top1.count(corpus[order[0]]) == 1);
    // and the (2, 12] window matches exactly
    auto got = idx.window(scorer.embed(query), 2, 12);
    std::set<std::string> got_texts;
    for (auto d : got) got_texts.insert(corpus[d]);
    CHECK(got_texts == oracles::naive_window_texts(query, corpus, scorer, 2, 12));
  }
}

TEST_CASE("mined negatives sit inside the (K, L] window") {
  HashProjectionScorer scorer;
  Rng corpus_rng(13);
  std::vector<std::string> docs;
  for (int i = 0; i < 10; ++i) docs.push_back(synth_text(corpus_rng, i));
  auto idx = SimilarityIndex::build(docs, scorer);

  std::string query = synth_text(corpus_rng, 3, 5);
  std::string positive = docs[0];
  Rng rng(99);
  auto ex = mine_negatives(query, positive, idx, idx, docs, 2, 10, scorer, rng);

  REQUIRE(ex.negatives.size() == 9);
  auto q_emb = scorer.embed(query);
  for (const auto& n : ex.negatives) {
    CHECK(n.text != positive);
    if (n.provenance == NegProvenance::random) continue;
    // re-rank: the negative's document must fall at rank 3..10
    bool in_window = false;
    for (std::size_t d = 0; d < docs.size(); ++d) {
      if (docs[d] == n.text) {
        auto r = idx.rank_of(q_emb, d);
        in_window = in_window || (r >= 3 && r <= 10);
      }
    }
    CHECK(in_window);
  }

  SUBCASE("positive is never sampled even when it ranks first") {
    for (const auto& n : ex.negatives) CHECK(n.text != positive);
  }
  SUBCASE("negatives are pairwise distinct") {
    std::set<std::string> texts;
    for (const auto& n : ex.negatives) texts.insert(n.text);
    CHECK(texts.size() == 9);
  }
  SUBCASE("seeded mining is byte-identical") {
    Rng rng2(99);
    auto ex2 = mine_negatives(query, positive, idx, idx, docs, 2, 10, scorer, rng2);
    CHECK(ex.to_json().dump() == ex2.to_json().dump());
  }
}

TEST_CASE("mining errors") {
  HashProjectionScorer scorer;
  std::vector<std::string> docs = {"a b", "c d", "e f"};
  auto idx = SimilarityIndex::build(docs, scorer);
  Rng rng(1);
  SUBCASE("index smaller than L names the sizes") {
    try {
      mine_negatives("q", "a b", idx, idx, docs, 2, 10, scorer, rng);
      FAIL("expected error");
    } catch (const Error& e) {
      std::string m = e.what();
      CHECK(m.find("3") != std::string::npos);
      CHECK(m.find("10") != std::string::npos);
    }
  }
  SUBCASE("too few distinct candidates in the window") {
    CHECK_THROWS_AS(mine_negatives("q", "a b", idx, idx, docs, 1, 3, scorer, rng),
                    Error);
  }
}

TEST_CASE("mine_all produces 3/3/3 compositions matching the naive oracle") {
  HashProjectionScorer scorer;
  std::vector<RawPairSet> sets = {make_set("s0", TaskKind::retrieval, 60, 10),
                                  make_set("s1", TaskKind::qa, 60, 20)};
  WindowConfig cfg;
  cfg.k = 3;
  cfg.l = 20;
  auto mined = mine_all(sets, scorer, cfg, 42);
  REQUIRE(mined.size() == 120);

  std::vector<std::string> all_positives;
  for (const auto& s : sets) {
    for (const auto& [q, p] : s.pairs) all_positives.push_back(p);
  }

  for (std::size_t i = 0; i < mined.size(); i += 17) {
    const auto& ex = mined[i];
    int in_set = 0, cross = 0, random = 0;
    for (const auto& n : ex.negatives) {
      switch (n.provenance) {
        case NegProvenance::in_dataset_hard: ++in_set; break;
        case NegProvenance::cross_dataset_hard: ++cross; break;
        case NegProvenance::random: ++random; break;
      }
    }
    CHECK(in_set == 3);
    CHECK(cross == 3);
    CHECK(random == 3);

    const auto& subset = ex.subset_id == "s0" ? sets[0] : sets[1];
    std::vector<std::string> subset_positives;
    for (const auto& [q, p] : subset.pairs) subset_positives.push_back(p);
    auto in_window =
        oracles::naive_window_texts(ex.query, subset_positives, scorer, cfg.k, cfg.l);
    auto global_window =
        oracles::naive_window_texts(ex.query, all_positives, scorer, cfg.k, cfg.l);
    for (const auto& n : ex.negatives) {
      if (n.provenance == NegProvenance::in_dataset_hard) {
        CHECK(in_window.count(n.text) == 1);
      } else if (n.provenance == NegProvenance::cross_dataset_hard) {
        CHECK(global_window.count(n.text) == 1);
      }
    }
  }

  SUBCASE("round trips through jsonl") {
    auto j = mined[0].to_json();
    auto back = MinedExample::from_json(j);
    CHECK(back.to_json().dump() == j.dump());
  }
}
