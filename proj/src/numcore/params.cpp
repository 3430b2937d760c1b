#include "embedkit/numcore/params.hpp"

#include "embedkit/common/errors.hpp"

namespace embedkit::numcore {

Tensor& ParamSet::add(const std::string& name, Tensor t) {
  if (index_.count(name)) fail_data("duplicate parameter name: " + name);
  if (!t.requires_grad()) fail_data("parameter must require grad: " + name);
  index_[name] = items_.size();
  items_.emplace_back(name, std::move(t));
  return items_.back().second;
}

Tensor& ParamSet::at(const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end()) fail_data("unknown parameter: " + name);
  return items_[it->second].second;
}

const Tensor& ParamSet::at(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) fail_data("unknown parameter: " + name);
  return items_[it->second].second;
}

bool ParamSet::contains(const std::string& name) const {
  return index_.count(name) > 0;
}

void ParamSet::zero_grad() {
  for (auto& [name, t] : items_) t.zero_grad();
}

std::size_t ParamSet::total_numel() const {
  std::size_t n = 0;
  for (const auto& [name, t] : items_) n += t.numel();
  return n;
}

}  // namespace embedkit::numcore
