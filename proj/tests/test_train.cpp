#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "embedkit/common/errors.hpp"
#include "embedkit/common/hash.hpp"
#include "embedkit/train/infonce.hpp"
#include "embedkit/train/stages.hpp"
#include "oracles/mpfr_infonce.hpp"

using namespace embedkit;
using namespace embedkit::numcore;
using namespace embedkit::train;

namespace {

Tensor unit_vector(Rng& rng, std::size_t d) {
  auto t = Tensor::randn({d}, rng, 1.0);
  return l2_normalize(t);
}

// Distinct three-letter topic words, so every pair owns a separable token.
std::string topic_word(std::size_t i) {
  std::string w = "q";
  w += char('a' + (i / 26) % 26);
  w += char('a' + i % 26);
  return w;
}

tok::TokenizerBundle toy_bundle() {
  std::vector<std::string> corpus;
  for (std::size_t i = 0; i < 40; ++i) {
    corpus.push_back(topic_word(i) + " filler words common here");
  }
  auto vocab = tok::train_wordpiece(corpus, {.target_size = 220});
  tok::NormalizerConfig cfg;
  cfg.retained_ranges = {{0x20, 0x7E}};
  return tok::TokenizerBundle(std::move(cfg), std::move(vocab));
}

std::vector<std::pair<std::string, std::string>> topic_pairs(std::size_t n) {
  std::vector<std::pair<std::string, std::string>> pairs;
  for (std::size_t i = 0; i < n; ++i) {
    std::string topic = topic_word(i);
    pairs.emplace_back(topic + " filler", topic + " words " + topic);
  }
  return pairs;
}

encoder::EncoderModel toy_model(const tok::TokenizerBundle& tk, std::size_t d = 32,
                                std::size_t layers = 1, std::uint64_t seed = 1) {
  encoder::EncoderConfig cfg;
  cfg.vocab_size = tk.vocab.size();
  cfg.d_model = d;
  cfg.n_layers = layers;
  cfg.n_heads = 4;
  cfg.d_ff = d * 2;
  cfg.max_len = 32;
  return encoder::EncoderModel::init(cfg, seed);
}

double file_hash(const std::filesystem::path& p) {
  return double(fnv1a64(read_file(p)));
}

}  // namespace

TEST_CASE("infonce symmetric case is ln 2") {
  Rng rng(1);
  auto q = unit_vector(rng, 16);
  // positive and negative at identical similarity: use the same vector
  auto d = unit_vector(rng, 16);
  auto loss = infonce(q, d, {d}, 1.0);
  CHECK(std::abs(loss.item() - std::log(2.0)) < 1e-12);
  CHECK(std::abs(infonce_value(0.37, {0.37}, 1.0) - std::log(2.0)) < 1e-12);
}

TEST_CASE("nine negatives identical to the positive give exactly ln 10") {
  Rng rng(2);
  auto q = unit_vector(rng, 24);
  auto d = unit_vector(rng, 24);
  std::vector<Tensor> negs(9, d);
  auto loss = infonce(q, d, negs, 0.05);
  CHECK(std::abs(loss.item() - std::log(10.0)) < 1e-12);
}

TEST_CASE("no negatives means exactly zero loss") {
  Rng rng(3);
  auto q = unit_vector(rng, 8);
  auto d = unit_vector(rng, 8);
  CHECK(infonce(q, d, {}, 0.05).item() == 0.0);
}

TEST_CASE("non-positive temperature is an error") {
  Rng rng(4);
  auto q = unit_vector(rng, 8);
  CHECK_THROWS_AS(infonce(q, q, {}, 0.0), Error);
  CHECK_THROWS_AS(infonce_value(1.0, {}, -0.1), Error);
}

TEST_CASE("infonce agrees with the arbitrary-precision oracle") {
  // the quoted case first
  double direct = infonce_value(0.9, {0.1, 0.2}, 0.05);
  double oracle = oracles::infonce_mpfr(0.9, {0.1, 0.2}, 0.05);
  CHECK(std::abs(direct - oracle) < 1e-10);

  Rng rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    double tau = 0.02 + rng.uniform() * 0.98;
    double s_pos = 2.0 * rng.uniform() - 1.0;
    std::vector<double> negs(1 + rng.uniform_int(9));
    for (auto& s : negs) s = 2.0 * rng.uniform() - 1.0;

    double got = infonce_value(s_pos, negs, tau);
    double expected = oracles::infonce_mpfr(s_pos, negs, tau);
    CAPTURE(trial);
    CHECK(std::abs(got - expected) < 1e-10);

    // graph version agrees with the scalar version
    std::size_t d = 8;
    auto q = unit_vector(rng, d);
    std::vector<double> pos_data(d, 0.0);
    // synthesize vectors with prescribed similarities is fiddly; instead
    // check graph-vs-scalar on actual embeddings:
    auto dp = unit_vector(rng, d);
    std::vector<Tensor> negt = {unit_vector(rng, d), unit_vector(rng, d)};
    double sp = dot(q, dp).item();
    std::vector<double> sn = {dot(q, negt[0]).item(), dot(q, negt[1]).item()};
    CHECK(std::abs(infonce(q, dp, negt, tau).item() - infonce_value(sp, sn, tau)) <
          1e-12);
  }
}

TEST_CASE("infonce is monotone in the similarities") {
  std::vector<double> negs = {0.3, -0.2, 0.5};
  double base = infonce_value(0.6, negs, 0.07);
  CHECK(infonce_value(0.7, negs, 0.07) < base);
  auto harder = negs;
  harder[1] = 0.4;
  CHECK(infonce_value(0.6, harder, 0.07) > base);

  SUBCASE("and invariant to negative ordering") {
    std::vector<double> shuffled = {0.5, 0.3, -0.2};
    CHECK(infonce_value(0.6, shuffled, 0.07) ==
          doctest::Approx(base).epsilon(1e-15));
  }
}

TEST_CASE("in-batch loss at init approximates ln(batch size)") {
  Rng rng(6);
  const std::size_t batch = 16, d = 256;
  std::vector<Tensor> queries, positives;
  for (std::size_t i = 0; i < batch; ++i) {
    queries.push_back(unit_vector(rng, d));
    positives.push_back(unit_vector(rng, d));
  }
  // tau = 1 makes near-zero similarities near-uniform logits
  double loss = infonce_in_batch(queries, positives, 1.0).item();
  CHECK(loss > std::log(double(batch)) * 0.9);
  CHECK(loss < std::log(double(batch)) * 1.1);
}

TEST_CASE("stage1 rejects batch sizes without in-batch negatives") {
  auto tk = toy_bundle();
  auto model = toy_model(tk);
  auto cfg = StageConfig::defaults_for(Stage::stage1);
  cfg.batch_size = 1;
  CHECK_THROWS_AS(
      run_stage1(topic_pairs(4), model, tk, cfg, std::filesystem::temp_directory_path()),
      Error);
}

TEST_CASE("stage1 overfits a small synthetic pair set to recall 1.0") {
  auto tk = toy_bundle();
  auto model = toy_model(tk, 32, 1, 7);
  auto pairs = topic_pairs(16);

  auto cfg = StageConfig::defaults_for(Stage::stage1);
  cfg.epochs = 30;
  cfg.batch_size = 8;
  cfg.peak_lr = 2e-3;
  cfg.warmup_steps = 10;
  cfg.temperature = 0.05;

  namespace fs = std::filesystem;
  auto dir = fs::temp_directory_path() / "embedkit_stage1_overfit";
  fs::remove_all(dir);
  auto result = run_stage1(pairs, model, tk, cfg, dir);
  CHECK(result.log.size() > 30);

  std::vector<std::vector<double>> q_emb, d_emb;
  for (const auto& [q, d] : pairs) {
    q_emb.push_back(model.embed_vector(q, tk));
    d_emb.push_back(model.embed_vector(d, tk));
  }
  std::size_t hits = 0;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    std::size_t best = 0;
    double best_score = -2;
    for (std::size_t j = 0; j < pairs.size(); ++j) {
      double s = 0;
      for (std::size_t c = 0; c < q_emb[i].size(); ++c) s += q_emb[i][c] * d_emb[j][c];
      if (s > best_score) {
        best_score = s;
        best = j;
      }
    }
    hits += best == i;
  }
  CHECK(hits == pairs.size());
  fs::remove_all(dir);
}

TEST_CASE("stage1 reruns are bit-identical") {
  namespace fs = std::filesystem;
  auto tk = toy_bundle();
  auto pairs = topic_pairs(12);
  auto cfg = StageConfig::defaults_for(Stage::stage1);
  cfg.epochs = 2;
  cfg.batch_size = 4;
  cfg.warmup_steps = 3;

  auto run_once = [&](const fs::path& dir) {
    fs::remove_all(dir);
    auto model = toy_model(tk, 16, 1, 9);
    run_stage1(pairs, model, tk, cfg, dir);
    return file_hash(dir / "final.ektf");
  };
  auto a = run_once(fs::temp_directory_path() / "embedkit_s1_a");
  auto b = run_once(fs::temp_directory_path() / "embedkit_s1_b");
  CHECK(a == b);
  fs::remove_all(fs::temp_directory_path() / "embedkit_s1_a");
  fs::remove_all(fs::temp_directory_path() / "embedkit_s1_b");
}

namespace {

std::vector<pairmine::MinedExample> toy_mined(std::size_t n) {
  std::vector<pairmine::MinedExample> out;
  for (std::size_t i = 0; i < n; ++i) {
    pairmine::MinedExample e;
    std::string topic = topic_word(i);
    e.query = topic + " filler";
    e.positive = topic + " words";
    for (int k = 0; k < 3; ++k) {
      e.negatives.push_back({topic_word((i + 1 + k) % n) + " words",
                             pairmine::NegProvenance::in_dataset_hard});
    }
    for (int k = 0; k < 3; ++k) {
      e.negatives.push_back({topic_word((i + 4 + k) % n) + " filler",
                             pairmine::NegProvenance::cross_dataset_hard});
    }
    for (int k = 0; k < 3; ++k) {
      e.negatives.push_back({"common here " + std::to_string(k) + std::to_string(i),
                             pairmine::NegProvenance::random});
    }
    e.task_kind = pairmine::TaskKind::retrieval;
    e.subset_id = "toy";
    out.push_back(std::move(e));
  }
  return out;
}

instruct::TemplateLibrary toy_templates() {
  json j;
  j["version"] = 1;
  j["templates"] = json::array();
  json t;
  t["task_id"] = "toy-retrieval";
  t["category"] = "relative_pair";
  t["query_prompt"] = "find it: {{text}}";
  t["doc_prompt"] = "candidate: {{text}}";
  j["templates"].push_back(t);
  return instruct::TemplateLibrary::from_json(j);
}

}  // namespace

TEST_CASE("stage2 requires nine negatives and names the subset otherwise") {
  auto tk = toy_bundle();
  auto model = toy_model(tk);
  auto examples = toy_mined(6);
  examples[3].negatives.pop_back();
  auto cfg = StageConfig::defaults_for(Stage::stage2);
  cfg.task_templates = {{"retrieval", "toy-retrieval"}};
  try {
    run_stage2(examples, model, tk, toy_templates(), cfg,
               std::filesystem::temp_directory_path() / "embedkit_s2_err");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("toy") != std::string::npos);
  }
}

TEST_CASE("instruction variant reaches the data path: checkpoints differ") {
  namespace fs = std::filesystem;
  auto tk = toy_bundle();
  auto examples = toy_mined(8);
  auto templates = toy_templates();

  auto run_variant = [&](const std::string& variant, const fs::path& dir) {
    fs::remove_all(dir);
    auto model = toy_model(tk, 16, 1, 11);
    auto cfg = StageConfig::defaults_for(Stage::stage2);
    cfg.epochs = 1;
    cfg.batch_size = 4;
    cfg.warmup_steps = 1;
    cfg.peak_lr = 1e-3;
    cfg.variant = variant;
    cfg.uninstructed_mix_ratio = 0.0;
    cfg.task_templates = {{"retrieval", "toy-retrieval"}};
    run_stage2(examples, model, tk, templates, cfg, dir);
    return file_hash(dir / "final.ektf");
  };

  auto h1 = run_variant("inst1", fs::temp_directory_path() / "embedkit_s2_i1");
  auto h2 = run_variant("no_inst", fs::temp_directory_path() / "embedkit_s2_ni");
  CHECK(h1 != h2);

  SUBCASE("while the same variant reruns identically") {
    auto h1_again = run_variant("inst1", fs::temp_directory_path() / "embedkit_s2_i1b");
    CHECK(h1 == h1_again);
    fs::remove_all(fs::temp_directory_path() / "embedkit_s2_i1b");
  }
  fs::remove_all(fs::temp_directory_path() / "embedkit_s2_i1");
  fs::remove_all(fs::temp_directory_path() / "embedkit_s2_ni");
}

TEST_CASE("pretraining drives mlm loss below the uniform baseline") {
  namespace fs = std::filesystem;
  auto tk = toy_bundle();
  auto model = toy_model(tk, 32, 1, 13);
  std::vector<std::string> samples;
  for (int i = 0; i < 32; ++i) {
    samples.push_back(topic_word(i % 8) + " filler words common here");
  }
  auto cfg = StageConfig::defaults_for(Stage::mlm);
  cfg.epochs = 50;
  cfg.batch_size = 8;
  cfg.peak_lr = 1e-3;
  cfg.warmup_steps = 20;

  auto dir = fs::temp_directory_path() / "embedkit_pretrain_mlm";
  fs::remove_all(dir);
  auto result = run_pretrain(samples, model, tk, cfg, dir);
  REQUIRE(result.log.size() == 200);
  double final_loss = result.log.back().loss;
  CHECK(final_loss < std::log(double(tk.vocab.size())));
  fs::remove_all(dir);
}

TEST_CASE("dupmae with zero bow weight reproduces the retromae loss history") {
  namespace fs = std::filesystem;
  auto tk = toy_bundle();
  std::vector<std::string> samples;
  for (int i = 0; i < 12; ++i) {
    samples.push_back(topic_word(i) + " filler words common here");
  }

  auto run_obj = [&](Stage stage, double bow_weight, const fs::path& dir) {
    fs::remove_all(dir);
    auto model = toy_model(tk, 16, 1, 15);
    model.config.bow_loss_weight = bow_weight;
    auto cfg = StageConfig::defaults_for(stage);
    cfg.epochs = 2;
    cfg.batch_size = 4;
    cfg.warmup_steps = 2;
    return run_pretrain(samples, model, tk, cfg, dir);
  };

  auto retro = run_obj(Stage::retromae, 1.0, fs::temp_directory_path() / "ek_retro");
  auto dup0 = run_obj(Stage::dupmae, 0.0, fs::temp_directory_path() / "ek_dup0");
  auto dup1 = run_obj(Stage::dupmae, 1.0, fs::temp_directory_path() / "ek_dup1");

  REQUIRE(retro.log.size() == dup0.log.size());
  for (std::size_t i = 0; i < retro.log.size(); ++i) {
    CHECK(retro.log[i].loss == dup0.log[i].loss);
  }
  // with the bow term on, histories must diverge
  bool any_diff = false;
  for (std::size_t i = 0; i < retro.log.size(); ++i) {
    any_diff = any_diff || retro.log[i].loss != dup1.log[i].loss;
  }
  CHECK(any_diff);

  SUBCASE("same-seed rerun reproduces the loss history exactly") {
    auto retro2 =
        run_obj(Stage::retromae, 1.0, fs::temp_directory_path() / "ek_retro2");
    REQUIRE(retro.log.size() == retro2.log.size());
    for (std::size_t i = 0; i < retro.log.size(); ++i) {
      CHECK(retro.log[i].loss == retro2.log[i].loss);
    }
    fs::remove_all(fs::temp_directory_path() / "ek_retro2");
  }
  for (const char* d : {"ek_retro", "ek_dup0", "ek_dup1"}) {
    fs::remove_all(fs::temp_directory_path() / d);
  }
}

TEST_CASE("empty pretraining corpus is an error") {
  auto tk = toy_bundle();
  auto model = toy_model(tk);
  auto cfg = StageConfig::defaults_for(Stage::mlm);
  CHECK_THROWS_AS(
      run_pretrain({}, model, tk, cfg, std::filesystem::temp_directory_path()),
      Error);
}
