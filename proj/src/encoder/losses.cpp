#include "embedkit/encoder/losses.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "embedkit/common/errors.hpp"
#include "embedkit/tokenizer/wordpiece.hpp"

namespace embedkit::encoder {

using namespace numcore;
using tok::WordPieceVocab;

namespace {

bool is_special(int id) { return id <= WordPieceVocab::kMask; }

std::vector<std::size_t> eligible_positions(const std::vector<int>& ids) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (!is_special(ids[i])) out.push_back(i);
  }
  return out;
}

}  // namespace

MaskedSequence plan_masking(const std::vector<int>& framed_ids, double rate,
                            Rng& rng) {
  auto eligible = eligible_positions(framed_ids);
  if (eligible.empty()) {
    fail_data("masking: sequence has no ordinary tokens to mask");
  }
  std::size_t count = std::size_t(std::llround(rate * double(eligible.size())));
  count = std::clamp<std::size_t>(count, 1, eligible.size());

  MaskedSequence m;
  m.input_ids = framed_ids;
  m.targets.assign(framed_ids.size(), kIgnoreLabel);
  m.attention_mask.assign(framed_ids.size(), 1);
  for (std::size_t pick : rng.sample_without_replacement(eligible.size(), count)) {
    std::size_t pos = eligible[pick];
    m.targets[pos] = framed_ids[pos];
    m.input_ids[pos] = WordPieceVocab::kMask;
  }
  return m;
}

Tensor mlm_loss(const std::vector<MaskedSequence>& batch, const EncoderModel& model) {
  if (batch.empty()) fail_data("mlm_loss: empty batch");
  std::size_t total_masked = 0;
  for (const auto& seq : batch) {
    for (int t : seq.targets) total_masked += (t != kIgnoreLabel);
  }
  if (total_masked == 0) fail_data("mlm_loss: batch has zero masked positions");

  Tensor sum;
  for (const auto& seq : batch) {
    auto out = model.forward(seq.input_ids, seq.attention_mask);
    auto logits = model.vocab_logits(out.hidden);
    auto seq_sum =
        cross_entropy_rows(logits, seq.targets, kIgnoreLabel, Reduction::sum);
    sum = sum.defined() ? add(sum, seq_sum) : seq_sum;
  }
  return scale(sum, 1.0 / double(total_masked));
}

namespace {

struct RetroResult {
  Tensor reconstruction;   // summed decoder cross-entropy
  Tensor encoder_hidden;   // encoder states over the moderately masked input
};

RetroResult run_retromae(const std::vector<int>& framed_ids,
                         const EncoderModel& model, Rng& rng) {
  if (framed_ids.size() < 4) {
    fail_data("retromae: sequence of " + std::to_string(framed_ids.size()) +
              " tokens is too short to mask at both rates");
  }
  const auto& cfg = model.config;

  // Draw order is pinned: encoder plan, then decoder plan.
  MaskedSequence enc = plan_masking(framed_ids, cfg.retromae_encoder_mask_rate, rng);
  MaskedSequence dec = plan_masking(framed_ids, cfg.retromae_decoder_mask_rate, rng);

  auto enc_out = model.forward(enc.input_ids, enc.attention_mask);

  // Decoder input H = [h, e_1+p_1, ..., e_n+p_n] over the aggressively
  // masked ids; position embeddings are shared with the encoder.
  const std::size_t n = framed_ids.size();
  std::vector<int> tail_ids(dec.input_ids.begin() + 1, dec.input_ids.end());
  std::vector<int> tail_pos(n - 1);
  for (std::size_t i = 0; i < n - 1; ++i) tail_pos[i] = int(i + 1);
  auto e = embedding_rows(model.params.at("embed/tokens"), tail_ids);
  auto p = embedding_rows(model.params.at("embed/positions"), tail_pos);
  auto h_row = reshape(enc_out.cls, {1, cfg.d_model});
  auto decoded = model.run_decoder(concat_rows({h_row, add(e, p)}));

  auto logits = model.vocab_logits(decoded);
  RetroResult r;
  r.reconstruction =
      cross_entropy_rows(logits, dec.targets, kIgnoreLabel, Reduction::sum);
  r.encoder_hidden = enc_out.hidden;
  return r;
}

}  // namespace

Tensor retromae_loss(const std::vector<int>& framed_ids, const EncoderModel& model,
                     Rng& rng) {
  return run_retromae(framed_ids, model, rng).reconstruction;
}

Tensor dupmae_loss(const std::vector<int>& framed_ids, const EncoderModel& model,
                   Rng& rng) {
  auto retro = run_retromae(framed_ids, model, rng);
  // Exact equality with retromae_loss when the weight is zero.
  if (model.config.bow_loss_weight == 0.0) return retro.reconstruction;

  // Bag-of-words head over the ordinary-token encoder states: project to
  // vocabulary logits, max-pool over positions, score the set of input
  // tokens.
  const std::size_t n = framed_ids.size();
  auto body = slice_rows(retro.encoder_hidden, 1, n - 1);
  auto bow_logits = add_rowwise(matmul(body, model.params.at("bow/W")),
                                model.params.at("bow/b"));
  auto pooled = max_over_rows(bow_logits);
  auto pooled_row = reshape(pooled, {1, pooled.shape()[0]});

  std::set<int> token_set;
  for (int id : framed_ids) {
    if (!is_special(id)) token_set.insert(id);
  }
  std::vector<Tensor> rows(token_set.size(), pooled_row);
  std::vector<int> targets(token_set.begin(), token_set.end());
  auto bow =
      cross_entropy_rows(concat_rows(rows), targets, kIgnoreLabel, Reduction::mean);

  return add(retro.reconstruction, scale(bow, model.config.bow_loss_weight));
}

}  // namespace embedkit::encoder
