#include "embedkit/numcore/tensor.hpp"

#include <algorithm>
#include <unordered_set>

#include "embedkit/common/errors.hpp"
#include "embedkit/numcore/precision.hpp"

namespace embedkit::numcore {

std::size_t shape_numel(const Shape& s) {
  std::size_t n = 1;
  for (std::size_t d : s) n *= d;
  return n;
}

std::string shape_str(const Shape& s) {
  std::string out = "(";
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(s[i]);
  }
  out += ")";
  return out;
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
  return full(std::move(shape), 0.0, requires_grad);
}

Tensor Tensor::full(Shape shape, double value, bool requires_grad) {
  for (std::size_t d : shape) {
    if (d == 0) fail_data("tensor extents must be positive, got " + shape_str(shape));
  }
  auto node = std::make_shared<Node>();
  node->shape = std::move(shape);
  node->data.assign(shape_numel(node->shape), quantize(value));
  node->requires_grad = requires_grad;
  node->needs_grad = requires_grad;
  if (requires_grad) node->ensure_grad();
  return Tensor(node);
}

Tensor Tensor::from_data(Shape shape, std::vector<double> data, bool requires_grad) {
  if (shape_numel(shape) != data.size()) {
    fail_data("tensor data length " + std::to_string(data.size()) +
              " does not match shape " + shape_str(shape));
  }
  auto node = std::make_shared<Node>();
  node->shape = std::move(shape);
  node->data = std::move(data);
  for (double& v : node->data) v = quantize(v);
  node->requires_grad = requires_grad;
  node->needs_grad = requires_grad;
  if (requires_grad) node->ensure_grad();
  return Tensor(node);
}

Tensor Tensor::randn(Shape shape, Rng& rng, double stdev, bool requires_grad) {
  std::vector<double> data(shape_numel(shape));
  for (double& v : data) v = rng.normal() * stdev;
  return from_data(std::move(shape), std::move(data), requires_grad);
}

std::span<const double> Tensor::grad() const {
  if (node_->grad.empty()) fail_data("tensor has no gradient buffer");
  return node_->grad;
}

void Tensor::zero_grad() {
  node_->grad.assign(node_->data.size(), 0.0);
}

double Tensor::item() const {
  if (numel() != 1) {
    fail_data("item() requires a single-element tensor, got " + shape_str(shape()));
  }
  return node_->data[0];
}

void backward(const Tensor& loss) {
  if (!loss.defined() || loss.numel() != 1) {
    fail_data("backward() requires a scalar loss, got " +
              (loss.defined() ? shape_str(loss.shape()) : std::string("<empty>")));
  }

  // Iterative post-order DFS: children appear after all their parents'
  // subgraphs, so reverse order visits each node before its inputs.
  std::vector<Node*> order;
  std::unordered_set<Node*> seen;
  struct Frame {
    Node* node;
    std::size_t next_parent;
  };
  std::vector<Frame> stack;
  Node* root = loss.node().get();
  if (seen.insert(root).second) stack.push_back({root, 0});
  while (!stack.empty()) {
    Frame& f = stack.back();
    if (f.next_parent < f.node->parents.size()) {
      Node* p = f.node->parents[f.next_parent++].get();
      if (p->needs_grad && seen.insert(p).second) stack.push_back({p, 0});
    } else {
      order.push_back(f.node);
      stack.pop_back();
    }
  }

  // Interior scratch gradients reset every call; leaf gradients accumulate.
  for (Node* n : order) {
    if (n->requires_grad) {
      n->ensure_grad();
    } else {
      n->grad.assign(n->data.size(), 0.0);
    }
  }

  root->grad[0] += 1.0;

  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* n = *it;
    if (n->backward_fn && n->needs_grad) n->backward_fn(*n);
  }
}

}  // namespace embedkit::numcore
