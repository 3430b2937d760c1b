#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "embedkit/common/rng.hpp"

namespace embedkit::numcore {

using Shape = std::vector<std::size_t>;

std::size_t shape_numel(const Shape& s);
std::string shape_str(const Shape& s);

// One vertex of the computation graph. Interior nodes own scratch gradient
// buffers that backward() re-zeroes per call; requires_grad leaves keep their
// gradient across calls (accumulation is additive, callers zero explicitly).
struct Node {
  Shape shape;
  std::vector<double> data;
  std::vector<double> grad;
  bool requires_grad = false;  // leaf parameter
  bool needs_grad = false;     // on a path to some requires_grad leaf
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backward_fn;
  const char* op = "leaf";

  std::size_t numel() const { return data.size(); }
  void ensure_grad() {
    if (grad.size() != data.size()) grad.assign(data.size(), 0.0);
  }
};

class Tensor {
public:
  Tensor() = default;
  explicit Tensor(std::shared_ptr<Node> node) : node_(std::move(node)) {}

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, double value, bool requires_grad = false);
  static Tensor from_data(Shape shape, std::vector<double> data,
                          bool requires_grad = false);
  // Gaussian init, quantized under the current precision mode.
  static Tensor randn(Shape shape, Rng& rng, double stdev,
                      bool requires_grad = false);

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const { return node_->shape; }
  std::size_t numel() const { return node_->data.size(); }
  bool requires_grad() const { return node_->requires_grad; }

  std::span<const double> data() const { return node_->data; }
  std::span<double> mutable_data() { return node_->data; }
  std::span<const double> grad() const;
  bool has_grad() const { return !node_->grad.empty(); }
  void zero_grad();

  double item() const;  // single-element tensors only

  std::shared_ptr<Node>& node() { return node_; }
  const std::shared_ptr<Node>& node() const { return node_; }

private:
  std::shared_ptr<Node> node_;
};

// Reverse-mode sweep from a scalar loss. Gradients of requires_grad leaves
// are accumulated (+=); interior scratch is reset on every call.
void backward(const Tensor& loss);

}  // namespace embedkit::numcore
