#include "embedkit/numcore/adamw.hpp"

#include <cmath>

#include "embedkit/common/errors.hpp"
#include "embedkit/numcore/checkpoint.hpp"
#include "embedkit/numcore/precision.hpp"

namespace embedkit::numcore {

AdamW::AdamW(const ParamSet& params, AdamWConfig cfg) : cfg_(cfg) {
  names_.reserve(params.size());
  first_moment_.reserve(params.size());
  second_moment_.reserve(params.size());
  for (const auto& [name, t] : params.items()) {
    names_.push_back(name);
    first_moment_.emplace_back(t.numel(), 0.0);
    second_moment_.emplace_back(t.numel(), 0.0);
  }
}

void AdamW::step(ParamSet& params, double learning_rate) {
  if (params.size() != names_.size()) {
    fail_data("AdamW: parameter set size changed since construction");
  }
  ++step_count_;
  const double b1 = cfg_.beta1, b2 = cfg_.beta2;
  const double bias1 = 1.0 - std::pow(b1, double(step_count_));
  const double bias2 = 1.0 - std::pow(b2, double(step_count_));

  for (std::size_t p = 0; p < names_.size(); ++p) {
    auto& [name, t] = params.items()[p];
    if (name != names_[p]) fail_data("AdamW: parameter order changed: " + name);
    if (!t.has_grad()) fail_data("AdamW: missing gradient for parameter: " + name);
    auto g = t.grad();
    auto w = t.mutable_data();
    auto& m = first_moment_[p];
    auto& v = second_moment_[p];
    for (std::size_t i = 0; i < w.size(); ++i) {
      m[i] = quantize(b1 * m[i] + (1.0 - b1) * g[i]);
      v[i] = quantize(b2 * v[i] + (1.0 - b2) * g[i] * g[i]);
      double mhat = m[i] / bias1;
      double vhat = v[i] / bias2;
      double update = mhat / (std::sqrt(vhat) + cfg_.epsilon) +
                      cfg_.weight_decay * w[i];
      w[i] = quantize(w[i] - learning_rate * update);
    }
  }
}

void AdamW::save_state(const std::filesystem::path& path) const {
  TensorMap m;
  for (std::size_t p = 0; p < names_.size(); ++p) {
    m["m/" + names_[p]] = {{first_moment_[p].size()}, first_moment_[p]};
    m["v/" + names_[p]] = {{second_moment_[p].size()}, second_moment_[p]};
  }
  m["step_count"] = {{1}, {double(step_count_)}};
  Dtype dt = precision() == Precision::f32 ? Dtype::f32 : Dtype::f64;
  save_tensor_file(path, m, dt);
}

void AdamW::load_state(const std::filesystem::path& path, const ParamSet& params) {
  if (params.size() != names_.size()) {
    fail_data("AdamW: parameter set size changed since construction");
  }
  TensorMap m = load_tensor_file(path);
  auto take = [&](const std::string& key) -> std::vector<double> {
    auto it = m.find(key);
    if (it == m.end()) fail_data("AdamW state file missing tensor: " + key);
    return std::move(it->second.values);
  };
  for (std::size_t p = 0; p < names_.size(); ++p) {
    auto fm = take("m/" + names_[p]);
    auto sm = take("v/" + names_[p]);
    if (fm.size() != first_moment_[p].size() || sm.size() != second_moment_[p].size()) {
      fail_data("AdamW state size mismatch for parameter: " + names_[p]);
    }
    first_moment_[p] = std::move(fm);
    second_moment_[p] = std::move(sm);
  }
  step_count_ = std::int64_t(take("step_count").at(0));
}

double lr_at(const WarmupSchedule& schedule, std::int64_t step) {
  if (step < 0 || step > schedule.total_steps) {
    fail_data("lr_at: step " + std::to_string(step) + " outside [0, " +
              std::to_string(schedule.total_steps) + "]");
  }
  if (schedule.warmup_steps > 0 && step <= schedule.warmup_steps) {
    return schedule.peak_lr * double(step) / double(schedule.warmup_steps);
  }
  if (step <= schedule.warmup_steps) return schedule.peak_lr;  // warmup == 0
  const double span = double(schedule.total_steps - schedule.warmup_steps);
  if (span <= 0.0) return 0.0;
  return schedule.peak_lr * double(schedule.total_steps - step) / span;
}

}  // namespace embedkit::numcore
