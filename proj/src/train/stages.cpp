#include "embedkit/train/stages.hpp"

#include <algorithm>
#include <cmath>

#include "embedkit/common/errors.hpp"
#include "embedkit/encoder/losses.hpp"
#include "embedkit/instruct/render.hpp"
#include "embedkit/numcore/adamw.hpp"
#include "embedkit/train/infonce.hpp"

namespace embedkit::train {

using namespace numcore;
using encoder::EncoderModel;

const char* stage_name(Stage s) {
  switch (s) {
    case Stage::mlm: return "mlm";
    case Stage::retromae: return "retromae";
    case Stage::dupmae: return "dupmae";
    case Stage::stage1: return "stage1";
    case Stage::stage2: return "stage2";
  }
  return "?";
}

Stage stage_from(const std::string& name) {
  for (Stage s : {Stage::mlm, Stage::retromae, Stage::dupmae, Stage::stage1,
                  Stage::stage2}) {
    if (name == stage_name(s)) return s;
  }
  fail_config("unknown training stage: " + name);
}

StageConfig StageConfig::defaults_for(Stage s) {
  StageConfig cfg;
  cfg.stage = s;
  switch (s) {
    case Stage::mlm:
      cfg.epochs = 3;
      cfg.batch_size = 32;
      break;
    case Stage::retromae:
    case Stage::dupmae:
      cfg.epochs = 3;
      cfg.batch_size = 64;
      break;
    case Stage::stage1:
      cfg.epochs = 5;
      cfg.batch_size = 16;
      break;
    case Stage::stage2:
      cfg.epochs = 2;
      cfg.batch_size = 8;
      break;
  }
  return cfg;
}

void StageConfig::validate() const {
  if (epochs == 0) fail_config("stage config: epochs must be positive");
  if (batch_size == 0) fail_config("stage config: batch_size must be positive");
  if (peak_lr <= 0.0) fail_config("stage config: peak_lr must be positive");
  if (temperature <= 0.0) fail_config("stage config: temperature must be positive");
  if (warmup_steps < 0) fail_config("stage config: warmup_steps must be >= 0");
  if (uninstructed_mix_ratio < 0.0 || uninstructed_mix_ratio > 1.0) {
    fail_config("stage config: uninstructed_mix_ratio must lie in [0,1]");
  }
}

json StageConfig::to_json() const {
  json j;
  j["stage"] = stage_name(stage);
  j["epochs"] = epochs;
  j["batch_size"] = batch_size;
  j["peak_lr"] = peak_lr;
  j["warmup_steps"] = warmup_steps;
  j["temperature"] = temperature;
  j["seed"] = seed;
  j["use_in_batch_negatives"] = use_in_batch_negatives;
  j["variant"] = variant;
  j["uninstructed_mix_ratio"] = uninstructed_mix_ratio;
  j["task_templates"] = json::object();
  for (const auto& [k, v] : task_templates) j["task_templates"][k] = v;
  return j;
}

StageConfig StageConfig::from_json(const json& j) {
  Stage s = stage_from(require_field(j, "stage", "stage config").get<std::string>());
  StageConfig cfg = defaults_for(s);
  cfg.epochs = j.value("epochs", cfg.epochs);
  cfg.batch_size = j.value("batch_size", cfg.batch_size);
  cfg.peak_lr = j.value("peak_lr", cfg.peak_lr);
  cfg.warmup_steps = j.value("warmup_steps", cfg.warmup_steps);
  cfg.temperature = j.value("temperature", cfg.temperature);
  cfg.seed = j.value("seed", cfg.seed);
  cfg.use_in_batch_negatives =
      j.value("use_in_batch_negatives", cfg.use_in_batch_negatives);
  cfg.variant = j.value("variant", cfg.variant);
  cfg.uninstructed_mix_ratio =
      j.value("uninstructed_mix_ratio", cfg.uninstructed_mix_ratio);
  if (j.contains("task_templates")) {
    for (auto it = j["task_templates"].begin(); it != j["task_templates"].end(); ++it) {
      cfg.task_templates[it.key()] = it.value().get<std::string>();
    }
  }
  cfg.validate();
  return cfg;
}

namespace {

struct Driver {
  AdamW optimizer;
  WarmupSchedule schedule;
  std::vector<TrainLogEntry> log;
  std::int64_t step = 0;

  Driver(EncoderModel& model, const StageConfig& cfg, std::int64_t total_steps)
      : optimizer(model.params, AdamWConfig{}),
        schedule{cfg.peak_lr, std::min<std::int64_t>(cfg.warmup_steps, total_steps),
                 total_steps} {}

  void apply(EncoderModel& model, const Tensor& loss) {
    backward(loss);
    ++step;
    double lr = lr_at(schedule, step);
    optimizer.step(model.params, lr);
    model.params.zero_grad();
    log.push_back({step, lr, loss.item()});
  }
};

void write_log(const std::filesystem::path& out_dir,
               const std::vector<TrainLogEntry>& log) {
  std::string csv = "step,lr,loss\n";
  char buf[96];
  for (const auto& e : log) {
    std::snprintf(buf, sizeof buf, "%lld,%.10g,%.10g\n",
                  static_cast<long long>(e.step), e.lr, e.loss);
    csv += buf;
  }
  atomic_write_file(out_dir / "train_log.csv", csv);
}

std::filesystem::path checkpoint_path(const std::filesystem::path& out_dir,
                                      std::size_t epoch) {
  return out_dir / ("epoch_" + std::to_string(epoch) + ".ektf");
}

TrainResult finish(const std::filesystem::path& out_dir, EncoderModel& model,
                   Driver& driver, std::size_t skipped) {
  model.save(out_dir / "final.ektf");
  write_log(out_dir, driver.log);
  TrainResult r;
  r.final_checkpoint = out_dir / "final.ektf";
  r.log = std::move(driver.log);
  r.skipped_sequences = skipped;
  return r;
}

}  // namespace

TrainResult run_pretrain(const std::vector<std::string>& samples,
                         EncoderModel& model, const tok::TokenizerBundle& tk,
                         const StageConfig& cfg,
                         const std::filesystem::path& out_dir) {
  cfg.validate();
  if (cfg.stage != Stage::mlm && cfg.stage != Stage::retromae &&
      cfg.stage != Stage::dupmae) {
    fail_config("run_pretrain: stage must be mlm, retromae or dupmae");
  }
  if (samples.empty()) fail_data("run_pretrain: empty corpus");
  std::filesystem::create_directories(out_dir);

  // Tokenize once; sequences too short for the objective are skipped.
  const std::size_t min_len = cfg.stage == Stage::mlm ? 3 : 4;
  std::vector<std::vector<int>> sequences;
  std::size_t skipped = 0;
  for (const auto& s : samples) {
    auto ids = tk.framed_ids(s, model.config.max_len);
    if (ids.size() < min_len) {
      ++skipped;
      continue;
    }
    sequences.push_back(std::move(ids));
  }
  if (sequences.empty()) fail_data("run_pretrain: no usable sequences after tokenization");

  const std::int64_t steps_per_epoch =
      std::int64_t((sequences.size() + cfg.batch_size - 1) / cfg.batch_size);
  Driver driver(model, cfg, std::int64_t(cfg.epochs) * steps_per_epoch);

  std::vector<std::size_t> order(sequences.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    Rng shuffle_rng(derive_seed(cfg.seed, 0x50455031 + epoch));
    shuffle_rng.shuffle(order);
    Rng mask_rng(derive_seed(cfg.seed, 0x4D41534B + epoch));

    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      Tensor loss;
      if (cfg.stage == Stage::mlm) {
        std::vector<encoder::MaskedSequence> batch;
        for (std::size_t i = start; i < end; ++i) {
          batch.push_back(encoder::plan_masking(sequences[order[i]],
                                                model.config.mlm_mask_rate, mask_rng));
        }
        loss = encoder::mlm_loss(batch, model);
      } else {
        Tensor sum;
        for (std::size_t i = start; i < end; ++i) {
          auto l = cfg.stage == Stage::retromae
                       ? encoder::retromae_loss(sequences[order[i]], model, mask_rng)
                       : encoder::dupmae_loss(sequences[order[i]], model, mask_rng);
          sum = sum.defined() ? add(sum, l) : l;
        }
        loss = scale(sum, 1.0 / double(end - start));
      }
      driver.apply(model, loss);
    }
    model.save(checkpoint_path(out_dir, epoch));
  }
  return finish(out_dir, model, driver, skipped);
}

TrainResult run_stage1(const std::vector<std::pair<std::string, std::string>>& pairs,
                       EncoderModel& model, const tok::TokenizerBundle& tk,
                       const StageConfig& cfg,
                       const std::filesystem::path& out_dir) {
  cfg.validate();
  if (cfg.batch_size < 2) {
    fail_config("stage1: batch_size must be at least 2, otherwise no in-batch "
                "negatives exist");
  }
  if (pairs.empty()) fail_data("stage1: empty pair set");
  std::filesystem::create_directories(out_dir);

  const std::int64_t steps_per_epoch =
      std::int64_t(pairs.size() / cfg.batch_size +
                   ((pairs.size() % cfg.batch_size) >= 2 ? 1 : 0));
  Driver driver(model, cfg,
                std::max<std::int64_t>(1, std::int64_t(cfg.epochs) * steps_per_epoch));

  std::vector<std::size_t> order(pairs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::size_t skipped = 0;

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    Rng shuffle_rng(derive_seed(cfg.seed, 0x53544731 + epoch));
    shuffle_rng.shuffle(order);

    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      if (end - start < 2) {
        skipped += end - start;  // a lone pair has no in-batch negative
        continue;
      }
      std::vector<Tensor> queries, positives;
      for (std::size_t i = start; i < end; ++i) {
        queries.push_back(model.embed(pairs[order[i]].first, tk));
        positives.push_back(model.embed(pairs[order[i]].second, tk));
      }
      driver.apply(model, infonce_in_batch(queries, positives, cfg.temperature));
    }
    model.save(checkpoint_path(out_dir, epoch));
  }
  return finish(out_dir, model, driver, skipped);
}

TrainResult run_stage2(const std::vector<pairmine::MinedExample>& examples,
                       EncoderModel& model, const tok::TokenizerBundle& tk,
                       const instruct::TemplateLibrary& templates,
                       const StageConfig& cfg,
                       const std::filesystem::path& out_dir) {
  cfg.validate();
  if (examples.empty()) fail_data("stage2: empty example set");
  for (const auto& e : examples) {
    if (e.negatives.size() != 9) {
      fail_data("stage2: example in subset " + e.subset_id + " has " +
                std::to_string(e.negatives.size()) + " negatives, expected 9");
    }
  }
  std::filesystem::create_directories(out_dir);

  instruct::VariantPolicy policy;
  policy.variant = instruct::variant_from(cfg.variant);
  policy.uninstructed_mix_ratio = cfg.uninstructed_mix_ratio;

  auto template_for = [&](const pairmine::MinedExample& e)
      -> const instruct::InstructionTemplate& {
    auto it = cfg.task_templates.find(pairmine::task_kind_name(e.task_kind));
    if (it == cfg.task_templates.end()) {
      fail_config("stage2: no template mapping for task_kind " +
                  std::string(pairmine::task_kind_name(e.task_kind)));
    }
    return templates.get(it->second);
  };

  const std::int64_t steps_per_epoch =
      std::int64_t((examples.size() + cfg.batch_size - 1) / cfg.batch_size);
  Driver driver(model, cfg, std::int64_t(cfg.epochs) * steps_per_epoch);

  std::vector<std::size_t> order(examples.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    Rng shuffle_rng(derive_seed(cfg.seed, 0x53544732 + epoch));
    shuffle_rng.shuffle(order);

    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);

      // Render, then embed: query, own positive, nine explicit negatives.
      std::vector<Tensor> queries, positives;
      std::vector<std::vector<Tensor>> negatives(end - start);
      for (std::size_t i = start; i < end; ++i) {
        const auto& ex = examples[order[i]];
        const auto& tmpl = template_for(ex);
        instruct::TrainingExample te;
        te.query = ex.query;
        te.positive = ex.positive;
        for (const auto& n : ex.negatives) te.negatives.push_back(n.text);
        te.task_id = tmpl.task_id;
        te.category = tmpl.category;
        auto rendered = instruct::render(
            te, tmpl, policy,
            derive_seed(cfg.seed, (epoch << 32) ^ order[i]));
        queries.push_back(model.embed(rendered.query, tk));
        positives.push_back(model.embed(rendered.positive, tk));
        for (const auto& n : rendered.negatives) {
          negatives[i - start].push_back(model.embed(n, tk));
        }
      }

      Tensor sum;
      for (std::size_t i = 0; i < queries.size(); ++i) {
        std::vector<Tensor> negs = negatives[i];
        if (cfg.use_in_batch_negatives) {
          for (std::size_t j = 0; j < positives.size(); ++j) {
            if (j != i) negs.push_back(positives[j]);
          }
        }
        auto l = infonce(queries[i], positives[i], negs, cfg.temperature);
        sum = sum.defined() ? add(sum, l) : l;
      }
      driver.apply(model, scale(sum, 1.0 / double(queries.size())));
    }
    model.save(checkpoint_path(out_dir, epoch));
  }
  return finish(out_dir, model, driver, 0);
}

}  // namespace embedkit::train
