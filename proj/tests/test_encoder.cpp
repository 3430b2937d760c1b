#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "embedkit/common/errors.hpp"
#include "embedkit/encoder/losses.hpp"
#include "embedkit/encoder/model.hpp"
#include "embedkit/numcore/adamw.hpp"
#include "embedkit/numcore/ops.hpp"
#include "embedkit/numcore/precision.hpp"
#include "oracles/finite_diff.hpp"

using namespace embedkit;
using namespace embedkit::encoder;
using namespace embedkit::numcore;
using tok::WordPieceVocab;

namespace {

EncoderConfig small_config(std::size_t vocab = 40, std::size_t d = 16,
                           std::size_t layers = 1) {
  EncoderConfig cfg;
  cfg.vocab_size = vocab;
  cfg.d_model = d;
  cfg.n_layers = layers;
  cfg.n_heads = 2;
  cfg.d_ff = d * 2;
  cfg.max_len = 32;
  return cfg;
}

std::vector<int> random_frame(Rng& rng, std::size_t body, std::size_t vocab) {
  std::vector<int> ids = {WordPieceVocab::kCls};
  for (std::size_t i = 0; i < body; ++i) {
    ids.push_back(5 + int(rng.uniform_int(vocab - 5)));
  }
  ids.push_back(WordPieceVocab::kSep);
  return ids;
}

tok::NormalizerConfig test_norm_config() {
  tok::NormalizerConfig cfg;
  cfg.retained_ranges = {{0x20, 0x7E}};
  return cfg;
}

tok::TokenizerBundle test_bundle() {
  std::vector<std::string> corpus = {
      "alpha beta gamma delta", "epsilon zeta eta theta", "iota kappa lambda mu",
      "alpha kappa", "beta zeta theta"};
  auto vocab = tok::train_wordpiece(corpus, {.target_size = 80});
  return tok::TokenizerBundle(test_norm_config(), std::move(vocab));
}

}  // namespace

TEST_CASE("forward is a pure function of its inputs") {
  auto model = EncoderModel::init(small_config(), 3);
  Rng rng(1);
  auto ids = random_frame(rng, 6, model.config.vocab_size);
  std::vector<int> mask(ids.size(), 1);
  auto a = model.forward(ids, mask);
  auto b = model.forward(ids, mask);
  for (std::size_t i = 0; i < a.cls.numel(); ++i) {
    CHECK(a.cls.data()[i] == b.cls.data()[i]);
  }
}

TEST_CASE("padding content does not influence the cls vector") {
  auto model = EncoderModel::init(small_config(), 4);
  Rng rng(2);
  auto ids = random_frame(rng, 5, model.config.vocab_size);
  const std::size_t real = ids.size();
  std::vector<int> padded = ids;
  padded.push_back(WordPieceVocab::kPad);
  padded.push_back(WordPieceVocab::kPad);
  std::vector<int> mask(padded.size(), 1);
  mask[real] = 0;
  mask[real + 1] = 0;

  auto base = model.forward(padded, mask);

  // swap the pad slots for different (non-attended) token ids
  std::vector<int> permuted = padded;
  permuted[real] = 7;
  permuted[real + 1] = 9;
  auto alt = model.forward(permuted, mask);

  for (std::size_t i = 0; i < base.cls.numel(); ++i) {
    CHECK(base.cls.data()[i] == doctest::Approx(alt.cls.data()[i]).epsilon(1e-12));
  }
}

TEST_CASE("over-length input is rejected") {
  auto model = EncoderModel::init(small_config(), 5);
  std::vector<int> ids(model.config.max_len + 1, 6);
  std::vector<int> mask(ids.size(), 1);
  CHECK_THROWS_AS(model.forward(ids, mask), Error);
}

TEST_CASE("outputs stay finite over many random batches at init") {
  auto model = EncoderModel::init(small_config(60, 32, 2), 6);
  Rng rng(60);
  for (int trial = 0; trial < 1000; ++trial) {
    auto ids = random_frame(rng, 2 + rng.uniform_int(12), model.config.vocab_size);
    std::vector<int> mask(ids.size(), 1);
    auto out = model.forward(ids, mask);
    for (double v : out.cls.data()) {
      REQUIRE(std::isfinite(v));
    }
  }
}

TEST_CASE("mlm loss equals ln(vocab) under a zeroed output head") {
  auto model = EncoderModel::init(small_config(40), 7);
  // Tied head: zeroing the token table and bias nulls every logit.
  for (auto& v : model.params.at("embed/tokens").mutable_data()) v = 0.0;
  for (auto& v : model.params.at("mlm/bias").mutable_data()) v = 0.0;

  Rng rng(3);
  auto ids = random_frame(rng, 8, model.config.vocab_size);
  auto plan = plan_masking(ids, model.config.mlm_mask_rate, rng);
  auto loss = mlm_loss({plan}, model);
  CHECK(loss.item() == doctest::Approx(std::log(40.0)).epsilon(1e-12));
}

TEST_CASE("mlm loss matches a hand-computed cross entropy on known logits") {
  // Two-symbol vocabulary beyond the specials; single layer with all the
  // transform weights zeroed, so hidden states reduce to layer-norm of the
  // embeddings and logits to hidden . E^T (bias zero).
  auto cfg = small_config(7, 4, 1);
  auto model = EncoderModel::init(cfg, 8);
  for (auto& [name, t] : model.params.items()) {
    bool keep = name == "embed/tokens" || name == "embed/positions" ||
                name.find("gamma") != std::string::npos;
    if (!keep) {
      for (auto& v : t.mutable_data()) v = 0.0;
    }
  }

  MaskedSequence seq;
  seq.input_ids = {WordPieceVocab::kCls, WordPieceVocab::kMask, 6,
                   WordPieceVocab::kSep};
  seq.targets = {kIgnoreLabel, 5, kIgnoreLabel, kIgnoreLabel};
  seq.attention_mask = {1, 1, 1, 1};

  auto loss = mlm_loss({seq}, model);

  // Independent arithmetic: replay embedding + double layer norm + tied
  // matmul with plain loops.
  const auto tokens = model.params.at("embed/tokens").data();
  const auto pos = model.params.at("embed/positions").data();
  const std::size_t d = cfg.d_model;
  auto ln = [&](std::vector<double> row) {
    double mean = 0;
    for (double v : row) mean += v;
    mean /= double(row.size());
    double var = 0;
    for (double v : row) var += (v - mean) * (v - mean);
    var /= double(row.size());
    for (auto& v : row) v = (v - mean) / std::sqrt(var + 1e-12);
    return row;
  };
  std::vector<double> emb(d);
  for (std::size_t c = 0; c < d; ++c) {
    emb[c] = tokens[std::size_t(WordPieceVocab::kMask) * d + c] + pos[1 * d + c];
  }
  // embedding LN, then two residual-free layer norms from the zeroed block
  auto hidden = ln(ln(ln(emb)));
  std::vector<double> logits(7);
  for (std::size_t v = 0; v < 7; ++v) {
    double s = 0;
    for (std::size_t c = 0; c < d; ++c) s += hidden[c] * tokens[v * d + c];
    logits[v] = s;
  }
  double mx = *std::max_element(logits.begin(), logits.end());
  double lse = 0;
  for (double l : logits) lse += std::exp(l - mx);
  double expected = std::log(lse) + mx - logits[5];

  CHECK(loss.item() == doctest::Approx(expected).epsilon(1e-10));
}

TEST_CASE("masking plans reproduce exactly under a fixed seed") {
  Rng a(11), b(11);
  std::vector<int> ids = {2, 10, 11, 12, 13, 14, 15, 16, 17, 18, 19, 20, 3};
  auto pa = plan_masking(ids, 0.3, a);
  auto pb = plan_masking(ids, 0.3, b);
  CHECK(pa.input_ids == pb.input_ids);
  CHECK(pa.targets == pb.targets);

  SUBCASE("masked fraction matches the rate within one token") {
    std::size_t masked = 0;
    for (int t : pa.targets) masked += (t != kIgnoreLabel);
    // 11 eligible tokens at rate 0.3 -> round(3.3) = 3
    CHECK(masked == 3);
  }
  SUBCASE("targets appear only at masked positions") {
    for (std::size_t i = 0; i < pa.input_ids.size(); ++i) {
      if (pa.targets[i] != kIgnoreLabel) {
        CHECK(pa.input_ids[i] == WordPieceVocab::kMask);
        CHECK(pa.targets[i] == ids[i]);
      } else {
        CHECK(pa.input_ids[i] == ids[i]);
      }
    }
  }
}

TEST_CASE("decoder mask rate 0.5 on a 20-token sequence marks 10 targets") {
  Rng rng(21);
  std::vector<int> ids = {WordPieceVocab::kCls};
  for (int i = 0; i < 20; ++i) ids.push_back(5 + i);
  ids.push_back(WordPieceVocab::kSep);
  auto plan = plan_masking(ids, 0.5, rng);
  std::size_t masked = 0;
  for (int t : plan.targets) masked += (t != kIgnoreLabel);
  CHECK(masked == 10);
}

TEST_CASE("sequences too short for retromae are rejected") {
  auto model = EncoderModel::init(small_config(), 9);
  Rng rng(1);
  std::vector<int> ids = {WordPieceVocab::kCls, 6, WordPieceVocab::kSep};
  CHECK_THROWS_AS(retromae_loss(ids, model, rng), Error);
}

TEST_CASE("dupmae with zero bow weight reproduces retromae exactly") {
  auto cfg = small_config();
  cfg.bow_loss_weight = 0.0;
  auto model = EncoderModel::init(cfg, 10);
  Rng rng(5);
  auto ids = random_frame(rng, 10, cfg.vocab_size);
  Rng r1(77), r2(77);
  auto a = retromae_loss(ids, model, r1);
  auto b = dupmae_loss(ids, model, r2);
  CHECK(a.item() == b.item());
}

TEST_CASE("single-distinct-token sequence gives a one-hot bow target") {
  auto cfg = small_config();
  auto model = EncoderModel::init(cfg, 11);
  std::vector<int> ids = {WordPieceVocab::kCls, 9, 9, 9, 9, WordPieceVocab::kSep};
  Rng r1(4), r2(4);
  auto retro = retromae_loss(ids, model, r1);
  auto dup = dupmae_loss(ids, model, r2);
  // the bow term scores exactly one label, so the delta is a single
  // cross-entropy value, strictly positive
  double delta = dup.item() - retro.item();
  CHECK(delta > 0.0);
  CHECK(delta < std::log(double(cfg.vocab_size)) * 2.0 + 1.0);
}

TEST_CASE("all three loss gradients pass finite-difference checks") {
  for (int seed = 0; seed < 6; ++seed) {
    auto cfg = small_config(24, 8, 1);
    cfg.d_ff = 16;
    cfg.max_len = 16;
    auto model = EncoderModel::init(cfg, 100 + std::uint64_t(seed));
    Rng data_rng(200 + std::uint64_t(seed));
    auto ids = random_frame(data_rng, 6, cfg.vocab_size);

    const int which = seed % 3;
    auto build = [&]() -> Tensor {
      Rng loss_rng(300 + std::uint64_t(seed));
      switch (which) {
        case 0: {
          Rng plan_rng(400 + std::uint64_t(seed));
          auto plan = plan_masking(ids, cfg.mlm_mask_rate, plan_rng);
          return mlm_loss({plan}, model);
        }
        case 1:
          return retromae_loss(ids, model, loss_rng);
        default:
          return dupmae_loss(ids, model, loss_rng);
      }
    };

    model.params.zero_grad();
    auto loss = build();
    backward(loss);

    auto value = [&]() { return build().item(); };
    Rng coord_rng(500 + std::uint64_t(seed));
    auto report =
        oracles::check_gradients(model.params.items(), value, coord_rng, 1e-4, 3);
    CAPTURE(seed);
    CAPTURE(report.worst_at);
    CAPTURE(report.worst_rel);
    CHECK(report.failures == 0);
    CHECK(report.checked > 50);
  }
}

TEST_CASE("embeddings are unit length and self-similar") {
  auto bundle = test_bundle();
  auto cfg = small_config(bundle.vocab.size(), 16, 1);
  auto model = EncoderModel::init(cfg, 12);
  auto v = model.embed_vector("alpha beta gamma", bundle);
  double norm = 0;
  for (double x : v) norm += x * x;
  CHECK(std::abs(std::sqrt(norm) - 1.0) < 1e-6);
  auto w = model.embed_vector("alpha beta gamma", bundle);
  double cos = 0;
  for (std::size_t i = 0; i < v.size(); ++i) cos += v[i] * w[i];
  CHECK(cos == doctest::Approx(1.0).epsilon(1e-12));

  SUBCASE("empty text embeds the bare frame") {
    auto e = model.embed_vector("", bundle);
    CHECK(e.size() == cfg.d_model);
  }
}

TEST_CASE("checkpoint round trip preserves the model bit for bit") {
  namespace fs = std::filesystem;
  auto dir = fs::temp_directory_path() / "embedkit_encoder_ckpt";
  fs::create_directories(dir);
  auto path = dir / "model.ektf";

  set_precision(Precision::f32);
  auto model = EncoderModel::init(small_config(), 13);
  model.save(path);
  auto loaded = EncoderModel::load(path);
  set_precision(Precision::f64);

  REQUIRE(loaded.params.size() == model.params.size());
  for (const auto& [name, t] : model.params.items()) {
    auto& lt = loaded.params.at(name);
    REQUIRE(lt.numel() == t.numel());
    for (std::size_t i = 0; i < t.numel(); ++i) {
      CHECK(lt.data()[i] == t.data()[i]);
    }
  }

  SUBCASE("missing config sidecar invalidates the checkpoint") {
    fs::remove(path.string() + ".config.json");
    CHECK_THROWS_AS(EncoderModel::load(path), Error);
  }
  fs::remove_all(dir);
}

TEST_CASE("information flows through h: a trained decoder needs it") {
  // Train a toy model briefly with the reconstruction objective, then
  // compare the loss with the real h against a zeroed h.
  auto cfg = small_config(30, 16, 1);
  cfg.max_len = 16;
  auto model = EncoderModel::init(cfg, 14);
  Rng data_rng(6);
  std::vector<std::vector<int>> seqs;
  for (int i = 0; i < 32; ++i) seqs.push_back(random_frame(data_rng, 8, 30));

  AdamW opt(model.params, AdamWConfig{});
  for (int step = 0; step < 200; ++step) {
    model.params.zero_grad();
    Rng step_rng(1000 + std::uint64_t(step));
    Tensor loss;
    for (int b = 0; b < 4; ++b) {
      auto l = retromae_loss(seqs[(step * 4 + b) % seqs.size()], model, step_rng);
      loss = loss.defined() ? add(loss, l) : l;
    }
    loss = scale(loss, 0.25);
    backward(loss);
    opt.step(model.params, 1e-3);
  }

  // Rebuild the decoder input by hand with h and with h = 0.
  double with_h = 0.0, without_h = 0.0;
  for (int t = 0; t < 8; ++t) {
    const auto& ids = seqs[std::size_t(t)];
    Rng r(2000 + std::uint64_t(t));
    auto enc = plan_masking(ids, cfg.retromae_encoder_mask_rate, r);
    auto dec = plan_masking(ids, cfg.retromae_decoder_mask_rate, r);
    auto out = model.forward(enc.input_ids, enc.attention_mask);

    std::vector<int> tail_ids(dec.input_ids.begin() + 1, dec.input_ids.end());
    std::vector<int> tail_pos(tail_ids.size());
    for (std::size_t i = 0; i < tail_pos.size(); ++i) tail_pos[i] = int(i + 1);
    auto e = embedding_rows(model.params.at("embed/tokens"), tail_ids);
    auto p = embedding_rows(model.params.at("embed/positions"), tail_pos);

    auto h_real = reshape(out.cls, {1, cfg.d_model});
    auto loss_real = cross_entropy_rows(
        model.vocab_logits(model.run_decoder(concat_rows({h_real, add(e, p)}))),
        dec.targets, kIgnoreLabel, Reduction::sum);
    with_h += loss_real.item();

    auto h_zero = Tensor::zeros({1, cfg.d_model});
    auto loss_zero = cross_entropy_rows(
        model.vocab_logits(model.run_decoder(concat_rows({h_zero, add(e, p)}))),
        dec.targets, kIgnoreLabel, Reduction::sum);
    without_h += loss_zero.item();
  }
  CHECK(without_h > with_h);

  SUBCASE("and the token embeddings alone cannot explain the output") {
    // Zeroing everything except h still changes the loss: signal flows
    // through h by construction.
    const auto& ids = seqs[0];
    Rng r(3000);
    auto enc = plan_masking(ids, cfg.retromae_encoder_mask_rate, r);
    auto dec = plan_masking(ids, cfg.retromae_decoder_mask_rate, r);
    auto out = model.forward(enc.input_ids, enc.attention_mask);
    auto h_row = reshape(out.cls, {1, cfg.d_model});
    auto zeros = Tensor::zeros({ids.size() - 1, cfg.d_model});
    auto loss_only_h = cross_entropy_rows(
        model.vocab_logits(model.run_decoder(concat_rows({h_row, zeros}))),
        dec.targets, kIgnoreLabel, Reduction::sum);

    std::vector<int> tail_ids(dec.input_ids.begin() + 1, dec.input_ids.end());
    std::vector<int> tail_pos(tail_ids.size());
    for (std::size_t i = 0; i < tail_pos.size(); ++i) tail_pos[i] = int(i + 1);
    auto e = embedding_rows(model.params.at("embed/tokens"), tail_ids);
    auto p = embedding_rows(model.params.at("embed/positions"), tail_pos);
    auto loss_full = cross_entropy_rows(
        model.vocab_logits(model.run_decoder(concat_rows({h_row, add(e, p)}))),
        dec.targets, kIgnoreLabel, Reduction::sum);
    CHECK(loss_only_h.item() != loss_full.item());
  }
}
