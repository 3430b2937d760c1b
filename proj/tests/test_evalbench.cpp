#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "embedkit/common/errors.hpp"
#include "embedkit/common/hash.hpp"
#include "embedkit/common/rng.hpp"
#include "embedkit/evalbench/evaluate.hpp"
#include "embedkit/evalbench/metrics.hpp"
#include "embedkit/pairmine/scorer.hpp"
#include "oracles/naive_metrics.hpp"

using namespace embedkit;
using namespace embedkit::evalbench;

namespace {

// Orthogonal basis-vector embedder keyed by the first word of the text:
// texts starting with the same key embed identically.
class KeyedEmbedder : public pairmine::SimilarityScorer {
public:
  explicit KeyedEmbedder(std::size_t dim = 64) : dim_(dim) {}
  std::vector<double> embed(const std::string& text) const override {
    std::vector<double> v(dim_, 0.0);
    std::string key = text.substr(0, text.find(' '));
    std::uint64_t h = 1469598103934665603ull;
    for (char ch : key) h = (h ^ (unsigned char)ch) * 1099511628211ull;
    v[h % dim_] = 1.0;
    return v;
  }
  std::size_t dim() const override { return dim_; }

private:
  std::size_t dim_;
};

EvalTask make_retrieval_task(std::size_t docs, std::size_t queries) {
  RetrievalTask t;
  for (std::size_t i = 0; i < docs; ++i) {
    t.docs.emplace_back("d" + std::to_string(i), "key" + std::to_string(i) + " body");
  }
  for (std::size_t i = 0; i < queries; ++i) {
    RetrievalQuery q;
    q.id = "q" + std::to_string(i);
    q.text = "key" + std::to_string(i) + " question";
    q.relevant = {"d" + std::to_string(i)};
    t.queries.push_back(q);
  }
  EvalTask task;
  task.task_id = "retrieval-fixture";
  task.kind = TaskKind::retrieval;
  task.data = std::move(t);
  return task;
}

}  // namespace

TEST_CASE("a perfect embedder scores perfect retrieval") {
  auto task = make_retrieval_task(12, 6);
  KeyedEmbedder scorer;
  EvalContext ctx{scorer};
  auto report = eval_retrieval(task, ctx);
  CHECK(report.metrics["ndcg@10"] == doctest::Approx(1.0));
  CHECK(report.metrics["recall@1"] == doctest::Approx(1.0));
  CHECK(report.records == 6);
}

TEST_CASE("queries without relevant docs are excluded and counted") {
  auto task = make_retrieval_task(12, 4);
  std::get<RetrievalTask>(task.data).queries[2].relevant.clear();
  KeyedEmbedder scorer;
  EvalContext ctx{scorer};
  auto report = eval_retrieval(task, ctx);
  CHECK(report.records == 3);
  CHECK(report.excluded == 1);
}

TEST_CASE("random embeddings give near-uniform recall@1") {
  // 1 relevant of 100 docs, 1000 queries on random unit embeddings.
  class RandomEmbedder : public pairmine::SimilarityScorer {
  public:
    std::vector<double> embed(const std::string& text) const override {
      Rng rng(fnv1a64(text));
      std::vector<double> v(32);
      double norm = 0;
      for (auto& x : v) {
        x = rng.normal();
        norm += x * x;
      }
      norm = std::sqrt(norm);
      for (auto& x : v) x /= norm;
      return v;
    }
    std::size_t dim() const override { return 32; }
  };

  RetrievalTask t;
  for (int i = 0; i < 100; ++i) {
    t.docs.emplace_back("d" + std::to_string(i), "doc " + std::to_string(i));
  }
  for (int i = 0; i < 1000; ++i) {
    RetrievalQuery q;
    q.id = "q" + std::to_string(i);
    q.text = "query " + std::to_string(i);
    q.relevant = {"d" + std::to_string(i % 100)};
    t.queries.push_back(q);
  }
  EvalTask task;
  task.task_id = "random";
  task.kind = TaskKind::retrieval;
  task.data = std::move(t);

  RandomEmbedder scorer;
  EvalContext ctx{scorer};
  auto report = eval_retrieval(task, ctx);
  // E[recall@1] = 1/100; binomial 3 sigma over 1000 queries
  double sigma = std::sqrt(0.01 * 0.99 / 1000.0);
  CHECK(report.metrics["recall@1"] < 0.01 + 3 * sigma);
  CHECK(report.metrics["recall@1"] >= 0.0);
}

TEST_CASE("retrieval metrics match the naive oracle on random instances") {
  Rng rng(8);
  for (int trial = 0; trial < 12; ++trial) {
    std::size_t n = 10 + rng.uniform_int(20);
    std::vector<std::string> ranked;
    for (std::size_t i = 0; i < n; ++i) ranked.push_back("d" + std::to_string(i));
    rng.shuffle(ranked);
    std::set<std::string> relevant;
    std::size_t r = 1 + rng.uniform_int(5);
    for (std::size_t i = 0; i < r; ++i) {
      relevant.insert("d" + std::to_string(rng.uniform_int(n)));
    }
    for (std::size_t k : {1u, 5u, 10u}) {
      CHECK(std::abs(ndcg_at_k(ranked, relevant, k) -
                     oracles::naive_ndcg(ranked, relevant, k)) < 1e-10);
      CHECK(std::abs(recall_at_k(ranked, relevant, k) -
                     oracles::naive_recall(ranked, relevant, k)) < 1e-10);
    }
  }
}

TEST_CASE("spearman endpoints and oracle agreement") {
  std::vector<double> sims = {0.1, 0.5, 0.3, 0.9, 0.7};
  CHECK(spearman(sims, sims) == doctest::Approx(1.0));
  std::vector<double> reversed = {0.9, 0.5, 0.7, 0.1, 0.3};
  CHECK(spearman(sims, reversed) == doctest::Approx(-1.0));

  SUBCASE("constant gold errors instead of returning NaN") {
    CHECK_THROWS_AS(spearman(sims, {1, 1, 1, 1, 1}), Error);
  }
  SUBCASE("random instances match the brute-force rank correlation") {
    Rng rng(9);
    for (int trial = 0; trial < 12; ++trial) {
      std::size_t n = 5 + rng.uniform_int(50);
      std::vector<double> a(n), b(n);
      for (auto& v : a) v = rng.uniform_int(10);  // repeated values: tied ranks
      for (auto& v : b) v = rng.uniform();
      CHECK(std::abs(spearman(a, b) - oracles::naive_spearman(a, b)) < 1e-12);
    }
  }
}

TEST_CASE("classification fixtures") {
  KeyedEmbedder scorer;
  EvalContext ctx{scorer};
  SUBCASE("texts equal to their labels classify perfectly") {
    LabeledTextTask t;
    for (int i = 0; i < 10; ++i) {
      std::string label = "class" + std::to_string(i % 3);
      t.records.emplace_back(label + " content", label);
    }
    EvalTask task;
    task.task_id = "cls";
    task.kind = TaskKind::classification;
    task.data = std::move(t);
    auto report = eval_classification(task, ctx);
    CHECK(report.metrics["accuracy"] == doctest::Approx(1.0));
    CHECK(report.metrics["macro_f1"] == doctest::Approx(1.0));
  }
  SUBCASE("single-class data scores perfectly") {
    LabeledTextTask t;
    t.records = {{"a text", "only"}, {"b text", "only"}};
    EvalTask task;
    task.task_id = "single";
    task.kind = TaskKind::classification;
    task.data = std::move(t);
    auto report = eval_classification(task, ctx);
    CHECK(report.metrics["accuracy"] == doctest::Approx(1.0));
    CHECK(report.metrics["macro_f1"] == doctest::Approx(1.0));
  }
}

TEST_CASE("classification agrees with a brute-force nearest-label oracle") {
  KeyedEmbedder scorer;
  EvalContext ctx{scorer};
  Rng rng(10);
  LabeledTextTask t;
  std::vector<std::string> keys = {"alpha", "beta", "gamma", "delta"};
  for (int i = 0; i < 200; ++i) {
    std::string key = keys[rng.uniform_int(keys.size())];
    std::string label = keys[rng.uniform_int(keys.size())];
    t.records.emplace_back(key + " body " + std::to_string(i), label);
  }
  EvalTask task;
  task.task_id = "synthetic";
  task.kind = TaskKind::classification;
  task.data = t;
  auto report = eval_classification(task, ctx);

  // Oracle: nearest label by cosine, computed with plain loops.
  std::set<std::string> label_set;
  for (auto& [text, label] : t.records) label_set.insert(label);
  std::vector<std::string> labels(label_set.begin(), label_set.end());
  std::vector<std::string> gold, pred;
  for (auto& [text, label] : t.records) {
    gold.push_back(label);
    auto v = scorer.embed(text);
    std::string best;
    double best_score = -2;
    for (const auto& l : labels) {
      auto e = scorer.embed(l);
      double s = 0;
      for (std::size_t c = 0; c < v.size(); ++c) s += v[c] * e[c];
      if (s > best_score) {
        best_score = s;
        best = l;
      }
    }
    pred.push_back(best);
  }
  CHECK(report.metrics["accuracy"] ==
        doctest::Approx(oracles::naive_accuracy(gold, pred)).epsilon(1e-12));
  CHECK(report.metrics["macro_f1"] ==
        doctest::Approx(oracles::naive_macro_f1(gold, pred)).epsilon(1e-12));
}

TEST_CASE("pair classification sweeps to the best threshold") {
  SUBCASE("separable similarities reach accuracy 1") {
    std::vector<double> sims = {0.9, 0.8, 0.85, 0.2, 0.1, 0.15};
    std::vector<int> labels = {1, 1, 1, 0, 0, 0};
    CHECK(best_threshold_accuracy(sims, labels) == doctest::Approx(1.0));
  }
  SUBCASE("labels independent of similarity approach the class prior") {
    Rng rng(11);
    std::vector<double> sims(1000);
    std::vector<int> labels(1000);
    std::size_t positives = 0;
    for (int i = 0; i < 1000; ++i) {
      sims[std::size_t(i)] = rng.uniform();
      labels[std::size_t(i)] = rng.uniform() < 0.7 ? 1 : 0;
      positives += labels[std::size_t(i)];
    }
    double prior = std::max(double(positives), double(1000 - positives)) / 1000.0;
    double acc = best_threshold_accuracy(sims, labels);
    CHECK(acc >= prior);          // the sweep can always hit the prior
    CHECK(acc < prior + 3 * 0.0145 + 0.02);  // and not much more
  }
  SUBCASE("sweep equals the exhaustive oracle") {
    Rng rng(12);
    for (int trial = 0; trial < 12; ++trial) {
      std::size_t n = 10 + rng.uniform_int(60);
      std::vector<double> sims(n);
      std::vector<int> labels(n);
      labels[0] = 0;
      labels[1] = 1;
      for (std::size_t i = 0; i < n; ++i) {
        sims[i] = rng.uniform();
        if (i > 1) labels[i] = int(rng.uniform_int(2));
      }
      CHECK(best_threshold_accuracy(sims, labels) ==
            doctest::Approx(oracles::naive_best_threshold_accuracy(sims, labels))
                .epsilon(1e-12));
    }
  }
  SUBCASE("single-class gold is an error") {
    CHECK_THROWS_AS(best_threshold_accuracy({0.5, 0.6}, {1, 1}), Error);
  }
}

TEST_CASE("reranking MAP") {
  SUBCASE("perfect ordering and single positive candidate give MAP 1") {
    CHECK(average_precision({true, false, false}) == doctest::Approx(1.0));
    CHECK(average_precision({true}) == doctest::Approx(1.0));
  }
  SUBCASE("ap equals the naive per-query oracle") {
    Rng rng(13);
    for (int trial = 0; trial < 12; ++trial) {
      std::size_t n = 2 + rng.uniform_int(20);
      std::vector<bool> rel(n);
      rel[rng.uniform_int(n)] = true;
      for (std::size_t i = 0; i < n; ++i) {
        if (rng.uniform() < 0.3) rel[i] = true;
      }
      CHECK(average_precision(rel) == doctest::Approx(oracles::naive_ap(rel)).epsilon(1e-12));
    }
  }
}

TEST_CASE("v-measure matches the hand-computed six-point case") {
  // classes [0,0,0,1,1,1], clusters [0,0,1,1,1,1]:
  //   H(C) = ln 2, H(K) = -(1/3 ln 1/3 + 2/3 ln 2/3)
  //   homogeneity = 0.4591479170272448, completeness = 0.5
  std::vector<int> gold = {0, 0, 0, 1, 1, 1};
  std::vector<int> pred = {0, 0, 1, 1, 1, 1};
  CHECK(v_measure(gold, pred) == doctest::Approx(0.47870397138568).epsilon(1e-12));

  SUBCASE("agrees with the log2 oracle on random labelings") {
    Rng rng(14);
    for (int trial = 0; trial < 12; ++trial) {
      std::size_t n = 6 + rng.uniform_int(60);
      std::vector<int> g(n), p(n);
      for (auto& v : g) v = int(rng.uniform_int(4));
      for (auto& v : p) v = int(rng.uniform_int(5));
      CHECK(std::abs(v_measure(g, p) - oracles::naive_v_measure(g, p)) < 1e-10);
    }
  }
}

TEST_CASE("kmeans clustering behavior") {
  SUBCASE("points identical to orthogonal centroids recover them") {
    std::vector<std::vector<double>> points;
    std::vector<int> gold;
    for (int c = 0; c < 3; ++c) {
      for (int i = 0; i < 5; ++i) {
        std::vector<double> v(8, 0.0);
        v[std::size_t(c)] = 1.0;
        points.push_back(v);
        gold.push_back(c);
      }
    }
    auto result = kmeans(points, 3, 42);
    CHECK(v_measure(gold, result.assignment) == doctest::Approx(1.0));
  }
  SUBCASE("identical points with k >= 2 are a reported error") {
    std::vector<std::vector<double>> points(5, std::vector<double>(4, 0.5));
    CHECK_THROWS_AS(kmeans(points, 2, 42), Error);
  }
  SUBCASE("fewer points than k is an error") {
    std::vector<std::vector<double>> points(2, std::vector<double>(4, 0.5));
    CHECK_THROWS_AS(kmeans(points, 3, 42), Error);
  }
}

TEST_CASE("metrics are invariant to record permutation") {
  KeyedEmbedder scorer;
  EvalContext ctx{scorer};
  auto task = make_retrieval_task(15, 8);
  auto report1 = eval_retrieval(task, ctx);
  auto& t = std::get<RetrievalTask>(task.data);
  std::reverse(t.docs.begin(), t.docs.end());
  std::reverse(t.queries.begin(), t.queries.end());
  auto report2 = eval_retrieval(task, ctx);
  CHECK(report1.metrics["ndcg@10"] == doctest::Approx(report2.metrics["ndcg@10"]));
  CHECK(report1.metrics["recall@10"] == doctest::Approx(report2.metrics["recall@10"]));
}

TEST_CASE("cross classification with an identity-friendly embedder") {
  KeyedEmbedder scorer;
  EvalContext ctx{scorer};
  PairTask t;
  for (int i = 0; i < 8; ++i) {
    // the rendered input "label_x ..." starts with the gold label key
    std::string label = "label" + std::to_string(i % 2);
    t.records.emplace_back(label, "tail text", label);
  }
  EvalTask task;
  task.task_id = "cross";
  task.kind = TaskKind::cross_classification;
  task.data = std::move(t);
  auto report = eval_cross_classification(task, ctx);
  CHECK(report.metrics["accuracy"] == doctest::Approx(1.0));
}

TEST_CASE("task files load and evaluate through the directory driver") {
  namespace fs = std::filesystem;
  auto dir = fs::temp_directory_path() / "embedkit_eval_dir";
  fs::remove_all(dir);
  fs::create_directories(dir);

  {
    std::vector<json> lines;
    json h;
    h["header"] = true;
    h["task_id"] = "toy-retrieval";
    h["kind"] = "retrieval";
    lines.push_back(h);
    for (int i = 0; i < 10; ++i) {
      json d;
      d["record"] = "doc";
      d["id"] = "d" + std::to_string(i);
      d["text"] = "key" + std::to_string(i) + " doc";
      lines.push_back(d);
    }
    for (int i = 0; i < 5; ++i) {
      json q;
      q["record"] = "query";
      q["id"] = "q" + std::to_string(i);
      q["text"] = "key" + std::to_string(i) + " find";
      q["relevant"] = {"d" + std::to_string(i)};
      lines.push_back(q);
    }
    write_jsonl(dir / "retrieval.jsonl", lines);
  }
  {
    std::vector<json> lines;
    json h;
    h["header"] = true;
    h["task_id"] = "toy-sts";
    h["kind"] = "sts";
    lines.push_back(h);
    for (int i = 0; i < 6; ++i) {
      json p;
      p["text_a"] = "key" + std::to_string(i) + " a";
      p["text_b"] = "key" + std::to_string(i % 3) + " b";
      p["score"] = i % 3 == i ? 3.0 : 1.0;
      lines.push_back(p);
    }
    write_jsonl(dir / "sts.jsonl", lines);
  }

  KeyedEmbedder scorer;
  EvalContext ctx{scorer};
  auto report = evaluate_directory(dir, ctx, "test-checkpoint");
  REQUIRE(report.tasks.size() == 2);
  CHECK(report.tasks[0].task_id == "toy-retrieval");
  CHECK(report.tasks[0].error.empty());
  CHECK(report.tasks[0].primary == doctest::Approx(1.0));
  CHECK(report.tasks[1].task_id == "toy-sts");
  CHECK(report.to_json()["tasks"].size() == 2);
  CHECK(report.table().find("toy-retrieval") != std::string::npos);
  fs::remove_all(dir);
}
