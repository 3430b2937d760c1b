#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "embedkit/common/jsonl.hpp"
#include "embedkit/numcore/ops.hpp"
#include "embedkit/numcore/params.hpp"
#include "embedkit/pairmine/scorer.hpp"
#include "embedkit/tokenizer/bundle.hpp"

namespace embedkit::encoder {

struct EncoderConfig {
  std::size_t vocab_size = 0;
  std::size_t d_model = 64;
  std::size_t n_layers = 2;
  std::size_t n_heads = 4;
  std::size_t d_ff = 128;
  std::size_t max_len = 128;
  double mlm_mask_rate = 0.15;
  double retromae_encoder_mask_rate = 0.30;
  double retromae_decoder_mask_rate = 0.50;
  std::size_t decoder_layers = 1;
  double bow_loss_weight = 1.0;

  void validate() const;
  json to_json() const;
  static EncoderConfig from_json(const json& j);
};

// BERT-style post-LN encoder with learned absolute positions, a weight-tied
// vocabulary head, one lightweight reconstruction decoder block and a
// bag-of-words projection.
struct EncoderModel {
  EncoderConfig config;
  numcore::ParamSet params;

  static EncoderModel init(EncoderConfig cfg, std::uint64_t seed);

  struct ForwardResult {
    numcore::Tensor hidden;  // (seq, d_model)
    numcore::Tensor cls;     // (d_model)
  };

  // attention_mask: 1 = attended, 0 = padding. Over-length input errors.
  ForwardResult forward(const std::vector<int>& ids,
                        const std::vector<int>& attention_mask) const;

  // Vocabulary logits for every row of `hidden` (tied token embeddings).
  numcore::Tensor vocab_logits(const numcore::Tensor& hidden) const;

  // Runs the lightweight reconstruction decoder blocks (full attention)
  // over an assembled (seq, d_model) input.
  numcore::Tensor run_decoder(const numcore::Tensor& input) const;

  // CLS vector of the framed text, L2-normalized; graph-carrying, so the
  // contrastive stages can backpropagate through it.
  numcore::Tensor embed(const std::string& text, const tok::TokenizerBundle& tk) const;
  std::vector<double> embed_vector(const std::string& text,
                                   const tok::TokenizerBundle& tk) const;

  // Checkpoint (f32 tensor file) plus mandatory config sidecar
  // "<path>.config.json"; loading without the sidecar is an error.
  void save(const std::filesystem::path& path) const;
  static EncoderModel load(const std::filesystem::path& path);
};

// Adapter: a frozen encoder checkpoint as a pairmine/evalbench scorer.
class EncoderScorer : public pairmine::SimilarityScorer {
public:
  EncoderScorer(const EncoderModel& model, const tok::TokenizerBundle& tk)
      : model_(model), tk_(tk) {}

  std::vector<double> embed(const std::string& text) const override {
    return model_.embed_vector(text, tk_);
  }
  std::size_t dim() const override { return model_.config.d_model; }

private:
  const EncoderModel& model_;
  const tok::TokenizerBundle& tk_;
};

}  // namespace embedkit::encoder
