#pragma once

#include <cstdint>
#include <vector>

#include "embedkit/common/rng.hpp"
#include "embedkit/encoder/model.hpp"
#include "embedkit/numcore/tensor.hpp"

namespace embedkit::encoder {

constexpr int kIgnoreLabel = -100;

struct MaskedSequence {
  std::vector<int> input_ids;       // with [MASK] substitutions
  std::vector<int> targets;         // original ids at masked slots, ignore elsewhere
  std::vector<int> attention_mask;  // all ones for unpadded sequences
};

// Masks round(rate * eligible) ordinary positions (never CLS/SEP/PAD),
// at least one; reproduces exactly under a fixed seed via the caller's rng.
MaskedSequence plan_masking(const std::vector<int>& framed_ids, double rate,
                            Rng& rng);

// Mean cross-entropy over every masked position in the batch.
numcore::Tensor mlm_loss(const std::vector<MaskedSequence>& batch,
                         const EncoderModel& model);

// Encoder consumes the moderately masked sequence producing the CLS vector
// h; the decoder input is [h, e_1+p_1, ..., e_n+p_n] over the aggressively
// masked ids; the loss sums cross-entropy over decoder-masked positions.
numcore::Tensor retromae_loss(const std::vector<int>& framed_ids,
                              const EncoderModel& model, Rng& rng);

// retromae_loss plus bow_loss_weight times a bag-of-words term: non-CLS
// encoder states project to vocabulary logits, max-pool over positions, and
// score the set of ordinary input tokens (multi-label cross-entropy).
numcore::Tensor dupmae_loss(const std::vector<int>& framed_ids,
                            const EncoderModel& model, Rng& rng);

}  // namespace embedkit::encoder
