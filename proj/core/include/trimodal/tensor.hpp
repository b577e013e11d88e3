#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "trimodal/rng.hpp"

namespace trimodal {

namespace detail {

// One node of the computation graph. Values are 64-bit floats in row-major
// order; grad, once allocated, always has the same length as values.
struct TensorNode {
  std::vector<std::size_t> shape;
  std::vector<double> values;
  std::vector<double> grad;
  bool requires_grad = false;
  std::vector<std::shared_ptr<TensorNode>> parents;
  std::function<void(TensorNode&)> backward_fn;

  std::size_t size() const { return values.size(); }
  void ensure_grad() {
    if (grad.size() != values.size()) grad.assign(values.size(), 0.0);
  }
};

}  // namespace detail

// Handle to a graph node. Copies are shallow and share the node; use
// detach() for a history-free copy of the values.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> shape);
  Tensor(std::vector<std::size_t> shape, std::vector<double> values);

  static Tensor scalar(double value);
  static Tensor full(std::vector<std::size_t> shape, double value);
  // Elementwise uniform draw in [lo, hi); used for parameter initialization.
  static Tensor uniform(std::vector<std::size_t> shape, double lo, double hi, Rng& rng);

  bool defined() const { return node_ != nullptr; }
  const std::vector<std::size_t>& shape() const;
  std::size_t rank() const;
  std::size_t dim(std::size_t axis) const;
  std::size_t size() const;

  std::span<const double> values() const;
  std::span<double> values();
  double value() const;  // scalar tensors only
  double operator[](std::size_t i) const;

  bool requires_grad() const;
  Tensor& set_requires_grad(bool enabled);
  bool has_grad() const;
  std::span<const double> grad() const;
  void zero_grad();

  // Copy of the values with no graph history attached.
  Tensor detach() const;

  const std::shared_ptr<detail::TensorNode>& node() const { return node_; }
  static Tensor from_node(std::shared_ptr<detail::TensorNode> node);

 private:
  std::shared_ptr<detail::TensorNode> node_;
};

// Runs reverse-mode differentiation from a scalar loss. Gradients accumulate
// into every reachable node that requires them; leaf gradients add up across
// calls until zero_grad().
void backward(const Tensor& loss);

// Graph recording is enabled by default and suspended inside a NoGradGuard
// scope (evaluation paths, finite-difference re-evaluations).
bool grad_enabled();

class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

}  // namespace trimodal
