#pragma once

#include <cstddef>
#include <string>
#include <unordered_map>
#include <vector>

#include "embedkit/numcore/tensor.hpp"

namespace embedkit::numcore {

// Named, insertion-ordered collection of trainable tensors. The order fixes
// optimizer iteration and checkpoint layout, so runs are reproducible.
class ParamSet {
public:
  Tensor& add(const std::string& name, Tensor t);
  Tensor& at(const std::string& name);
  const Tensor& at(const std::string& name) const;
  bool contains(const std::string& name) const;

  std::size_t size() const { return items_.size(); }
  const std::vector<std::pair<std::string, Tensor>>& items() const {
    return items_;
  }
  std::vector<std::pair<std::string, Tensor>>& items() { return items_; }

  void zero_grad();
  std::size_t total_numel() const;

private:
  std::vector<std::pair<std::string, Tensor>> items_;
  std::unordered_map<std::string, std::size_t> index_;
};

}  // namespace embedkit::numcore
