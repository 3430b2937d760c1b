#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "embedkit/encoder/model.hpp"
#include "embedkit/instruct/templates.hpp"
#include "embedkit/pairmine/mine.hpp"
#include "embedkit/tokenizer/bundle.hpp"

namespace embedkit::train {

enum class Stage { mlm, retromae, dupmae, stage1, stage2 };
const char* stage_name(Stage s);
Stage stage_from(const std::string& name);

struct StageConfig {
  Stage stage = Stage::mlm;
  std::size_t epochs = 3;
  std::size_t batch_size = 32;
  double peak_lr = 5e-5;
  std::int64_t warmup_steps = 1000;
  double temperature = 0.05;        // contrastive stages
  std::uint64_t seed = 42;
  bool use_in_batch_negatives = true;  // stage 2
  std::string variant = "inst1";       // stage 2 instruction policy
  double uninstructed_mix_ratio = 0.2;
  // stage 2: task_kind name -> template task_id
  std::map<std::string, std::string> task_templates;

  // Per-stage defaults: mlm 3 epochs/batch 32, retromae and dupmae 3/64,
  // stage1 5/16, stage2 2/8.
  static StageConfig defaults_for(Stage s);
  void validate() const;
  json to_json() const;
  static StageConfig from_json(const json& j);
};

struct TrainLogEntry {
  std::int64_t step;
  double lr;
  double loss;
};

struct TrainResult {
  std::filesystem::path final_checkpoint;
  std::vector<TrainLogEntry> log;
  std::size_t skipped_sequences = 0;
};

// Masked-autoencoding pretraining (objective = cfg.stage: mlm, retromae or
// dupmae) over text samples. Writes epoch checkpoints, final.ektf and
// train_log.csv under out_dir.
TrainResult run_pretrain(const std::vector<std::string>& samples,
                         encoder::EncoderModel& model,
                         const tok::TokenizerBundle& tk, const StageConfig& cfg,
                         const std::filesystem::path& out_dir);

// Unsupervised contrastive stage: in-batch negatives only.
TrainResult run_stage1(const std::vector<std::pair<std::string, std::string>>& pairs,
                       encoder::EncoderModel& model, const tok::TokenizerBundle& tk,
                       const StageConfig& cfg, const std::filesystem::path& out_dir);

// Supervised instruction-tuned stage over mined examples (9 explicit
// negatives each, optional in-batch extension).
TrainResult run_stage2(const std::vector<pairmine::MinedExample>& examples,
                       encoder::EncoderModel& model, const tok::TokenizerBundle& tk,
                       const instruct::TemplateLibrary& templates,
                       const StageConfig& cfg, const std::filesystem::path& out_dir);

}  // namespace embedkit::train
