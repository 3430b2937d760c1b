#include "embedkit/encoder/model.hpp"

#include <cmath>

#include "embedkit/common/errors.hpp"
#include "embedkit/numcore/checkpoint.hpp"

namespace embedkit::encoder {

using namespace numcore;

void EncoderConfig::validate() const {
  if (vocab_size < 6) fail_config("encoder: vocab_size must cover the specials");
  if (d_model == 0 || n_heads == 0 || d_model % n_heads != 0) {
    fail_config("encoder: d_model must be a positive multiple of n_heads");
  }
  if (max_len < 4) fail_config("encoder: max_len must be at least 4");
  for (double r : {mlm_mask_rate, retromae_encoder_mask_rate,
                   retromae_decoder_mask_rate}) {
    if (r <= 0.0 || r >= 1.0) fail_config("encoder: mask rates must lie in (0,1)");
  }
  if (retromae_decoder_mask_rate < retromae_encoder_mask_rate) {
    fail_config("encoder: decoder mask rate must be >= encoder mask rate");
  }
  if (decoder_layers == 0) fail_config("encoder: decoder_layers must be positive");
  if (bow_loss_weight < 0.0) fail_config("encoder: bow_loss_weight must be >= 0");
}

json EncoderConfig::to_json() const {
  json j;
  j["vocab_size"] = vocab_size;
  j["d_model"] = d_model;
  j["n_layers"] = n_layers;
  j["n_heads"] = n_heads;
  j["d_ff"] = d_ff;
  j["max_len"] = max_len;
  j["mlm_mask_rate"] = mlm_mask_rate;
  j["retromae_encoder_mask_rate"] = retromae_encoder_mask_rate;
  j["retromae_decoder_mask_rate"] = retromae_decoder_mask_rate;
  j["decoder_layers"] = decoder_layers;
  j["bow_loss_weight"] = bow_loss_weight;
  return j;
}

EncoderConfig EncoderConfig::from_json(const json& j) {
  EncoderConfig c;
  c.vocab_size = require_field(j, "vocab_size", "encoder config").get<std::size_t>();
  c.d_model = j.value("d_model", c.d_model);
  c.n_layers = j.value("n_layers", c.n_layers);
  c.n_heads = j.value("n_heads", c.n_heads);
  c.d_ff = j.value("d_ff", c.d_ff);
  c.max_len = j.value("max_len", c.max_len);
  c.mlm_mask_rate = j.value("mlm_mask_rate", c.mlm_mask_rate);
  c.retromae_encoder_mask_rate =
      j.value("retromae_encoder_mask_rate", c.retromae_encoder_mask_rate);
  c.retromae_decoder_mask_rate =
      j.value("retromae_decoder_mask_rate", c.retromae_decoder_mask_rate);
  c.decoder_layers = j.value("decoder_layers", c.decoder_layers);
  c.bow_loss_weight = j.value("bow_loss_weight", c.bow_loss_weight);
  c.validate();
  return c;
}

namespace {

constexpr double kInitStd = 0.02;

void add_block_params(ParamSet& p, const std::string& prefix,
                      const EncoderConfig& cfg, Rng& rng) {
  const std::size_t d = cfg.d_model, ff = cfg.d_ff;
  p.add(prefix + "/attn/Wq", Tensor::randn({d, d}, rng, kInitStd, true));
  p.add(prefix + "/attn/bq", Tensor::zeros({d}, true));
  p.add(prefix + "/attn/Wk", Tensor::randn({d, d}, rng, kInitStd, true));
  p.add(prefix + "/attn/bk", Tensor::zeros({d}, true));
  p.add(prefix + "/attn/Wv", Tensor::randn({d, d}, rng, kInitStd, true));
  p.add(prefix + "/attn/bv", Tensor::zeros({d}, true));
  p.add(prefix + "/attn/Wo", Tensor::randn({d, d}, rng, kInitStd, true));
  p.add(prefix + "/attn/bo", Tensor::zeros({d}, true));
  p.add(prefix + "/ln1/gamma", Tensor::full({d}, 1.0, true));
  p.add(prefix + "/ln1/beta", Tensor::zeros({d}, true));
  p.add(prefix + "/ffn/W1", Tensor::randn({d, ff}, rng, kInitStd, true));
  p.add(prefix + "/ffn/b1", Tensor::zeros({ff}, true));
  p.add(prefix + "/ffn/W2", Tensor::randn({ff, d}, rng, kInitStd, true));
  p.add(prefix + "/ffn/b2", Tensor::zeros({d}, true));
  p.add(prefix + "/ln2/gamma", Tensor::full({d}, 1.0, true));
  p.add(prefix + "/ln2/beta", Tensor::zeros({d}, true));
}

Tensor linear(const Tensor& x, const Tensor& w, const Tensor& b) {
  return add_rowwise(matmul(x, w), b);
}

Tensor run_block(const Tensor& input, const ParamSet& p, const std::string& prefix,
                 const EncoderConfig& cfg, const Tensor& attn_bias) {
  const std::size_t d = cfg.d_model;
  const std::size_t heads = cfg.n_heads;
  const std::size_t dh = d / heads;

  auto q = linear(input, p.at(prefix + "/attn/Wq"), p.at(prefix + "/attn/bq"));
  auto k = linear(input, p.at(prefix + "/attn/Wk"), p.at(prefix + "/attn/bk"));
  auto v = linear(input, p.at(prefix + "/attn/Wv"), p.at(prefix + "/attn/bv"));

  std::vector<Tensor> head_outputs;
  head_outputs.reserve(heads);
  for (std::size_t h = 0; h < heads; ++h) {
    auto qh = slice_cols(q, h * dh, dh);
    auto kh = slice_cols(k, h * dh, dh);
    auto vh = slice_cols(v, h * dh, dh);
    auto scores = scale(matmul(qh, transpose(kh)), 1.0 / std::sqrt(double(dh)));
    scores = add(scores, attn_bias);
    auto probs = softmax_rows(scores);
    head_outputs.push_back(matmul(probs, vh));
  }
  auto ctx = concat_cols(head_outputs);
  auto attn_out = linear(ctx, p.at(prefix + "/attn/Wo"), p.at(prefix + "/attn/bo"));
  auto x = layer_norm_rows(add(input, attn_out), p.at(prefix + "/ln1/gamma"),
                           p.at(prefix + "/ln1/beta"));
  auto ffn = linear(gelu(linear(x, p.at(prefix + "/ffn/W1"), p.at(prefix + "/ffn/b1"))),
                    p.at(prefix + "/ffn/W2"), p.at(prefix + "/ffn/b2"));
  return layer_norm_rows(add(x, ffn), p.at(prefix + "/ln2/gamma"),
                         p.at(prefix + "/ln2/beta"));
}

Tensor attention_bias(const std::vector<int>& attention_mask) {
  const std::size_t n = attention_mask.size();
  std::vector<double> bias(n * n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    if (attention_mask[j] == 0) {
      for (std::size_t i = 0; i < n; ++i) bias[i * n + j] = -1e9;
    }
  }
  return Tensor::from_data({n, n}, std::move(bias));
}

}  // namespace

EncoderModel EncoderModel::init(EncoderConfig cfg, std::uint64_t seed) {
  cfg.validate();
  EncoderModel m;
  m.config = cfg;
  Rng rng(seed);
  m.params.add("embed/tokens",
               Tensor::randn({cfg.vocab_size, cfg.d_model}, rng, kInitStd, true));
  m.params.add("embed/positions",
               Tensor::randn({cfg.max_len, cfg.d_model}, rng, kInitStd, true));
  m.params.add("embed/ln/gamma", Tensor::full({cfg.d_model}, 1.0, true));
  m.params.add("embed/ln/beta", Tensor::zeros({cfg.d_model}, true));
  for (std::size_t i = 0; i < cfg.n_layers; ++i) {
    add_block_params(m.params, "enc" + std::to_string(i), cfg, rng);
  }
  m.params.add("mlm/bias", Tensor::zeros({cfg.vocab_size}, true));
  for (std::size_t i = 0; i < cfg.decoder_layers; ++i) {
    add_block_params(m.params, "dec" + std::to_string(i), cfg, rng);
  }
  m.params.add("bow/W",
               Tensor::randn({cfg.d_model, cfg.vocab_size}, rng, kInitStd, true));
  m.params.add("bow/b", Tensor::zeros({cfg.vocab_size}, true));
  return m;
}

EncoderModel::ForwardResult EncoderModel::forward(
    const std::vector<int>& ids, const std::vector<int>& attention_mask) const {
  if (ids.empty()) fail_data("encoder forward: empty input");
  if (ids.size() > config.max_len) {
    fail_data("encoder forward: input of " + std::to_string(ids.size()) +
              " tokens exceeds max_len " + std::to_string(config.max_len));
  }
  if (attention_mask.size() != ids.size()) {
    fail_data("encoder forward: attention mask length mismatch");
  }

  std::vector<int> positions(ids.size());
  for (std::size_t i = 0; i < positions.size(); ++i) positions[i] = int(i);

  auto tok_e = embedding_rows(params.at("embed/tokens"), ids);
  auto pos_e = embedding_rows(params.at("embed/positions"), positions);
  auto x = layer_norm_rows(add(tok_e, pos_e), params.at("embed/ln/gamma"),
                           params.at("embed/ln/beta"));

  auto bias = attention_bias(attention_mask);
  for (std::size_t i = 0; i < config.n_layers; ++i) {
    x = run_block(x, params, "enc" + std::to_string(i), config, bias);
  }
  ForwardResult r;
  r.hidden = x;
  r.cls = row(x, 0);
  return r;
}

Tensor EncoderModel::vocab_logits(const Tensor& hidden) const {
  return add_rowwise(matmul(hidden, transpose(params.at("embed/tokens"))),
                     params.at("mlm/bias"));
}

Tensor EncoderModel::run_decoder(const Tensor& input) const {
  const std::size_t n = input.shape()[0];
  auto bias = Tensor::zeros({n, n});
  Tensor x = input;
  for (std::size_t i = 0; i < config.decoder_layers; ++i) {
    x = run_block(x, params, "dec" + std::to_string(i), config, bias);
  }
  return x;
}

Tensor EncoderModel::embed(const std::string& text,
                           const tok::TokenizerBundle& tk) const {
  auto ids = tk.framed_ids(text, config.max_len);
  std::vector<int> mask(ids.size(), 1);
  auto out = forward(ids, mask);
  return l2_normalize(out.cls);
}

std::vector<double> EncoderModel::embed_vector(const std::string& text,
                                               const tok::TokenizerBundle& tk) const {
  auto t = embed(text, tk);
  return std::vector<double>(t.data().begin(), t.data().end());
}

void EncoderModel::save(const std::filesystem::path& path) const {
  save_params(path, params, Dtype::f32);
  json sidecar;
  sidecar["format"] = "encoder-checkpoint";
  sidecar["version"] = 1;
  sidecar["encoder"] = config.to_json();
  atomic_write_file(path.string() + ".config.json", sidecar.dump(2) + "\n");
}

EncoderModel EncoderModel::load(const std::filesystem::path& path) {
  auto sidecar_path = path.string() + ".config.json";
  if (!std::filesystem::exists(sidecar_path)) {
    fail(ErrorKind::missing_input,
         "checkpoint config sidecar missing: " + sidecar_path +
             " (a checkpoint without its config is invalid)");
  }
  json sidecar = json::parse(read_file(sidecar_path));
  EncoderModel m = init(
      EncoderConfig::from_json(require_field(sidecar, "encoder", "checkpoint config")),
      0);
  load_params(path, m.params);
  return m;
}

}  // namespace embedkit::encoder
