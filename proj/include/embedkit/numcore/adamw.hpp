#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "embedkit/numcore/params.hpp"

namespace embedkit::numcore {

struct AdamWConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double weight_decay = 0.0;
};

// Decoupled-weight-decay Adam. Moments are zero-initialized and keyed to the
// ParamSet order; the learning rate is supplied per step by the schedule.
class AdamW {
public:
  AdamW(const ParamSet& params, AdamWConfig cfg);

  void step(ParamSet& params, double learning_rate);

  std::int64_t step_count() const { return step_count_; }
  const AdamWConfig& config() const { return cfg_; }

  void save_state(const std::filesystem::path& path) const;
  void load_state(const std::filesystem::path& path, const ParamSet& params);

private:
  AdamWConfig cfg_;
  std::int64_t step_count_ = 0;
  std::vector<std::string> names_;
  std::vector<std::vector<double>> first_moment_;
  std::vector<std::vector<double>> second_moment_;
};

struct WarmupSchedule {
  double peak_lr = 0.0;
  std::int64_t warmup_steps = 0;
  std::int64_t total_steps = 0;
};

// Piecewise-linear ramp to peak_lr at warmup_steps, then linear decay to zero
// at total_steps. Steps outside [0, total_steps] are an error.
double lr_at(const WarmupSchedule& schedule, std::int64_t step);

}  // namespace embedkit::numcore
