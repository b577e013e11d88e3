#include "trimodal/tensor.hpp"

#include <numeric>
#include <unordered_set>

#include "trimodal/errors.hpp"

namespace trimodal {

namespace {

thread_local bool g_grad_enabled = true;

std::size_t shape_product(const std::vector<std::size_t>& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) {
    if (d == 0) throw DimensionError("tensor dimensions must be positive");
    n *= d;
  }
  return n;
}

}  // namespace

Tensor::Tensor(std::vector<std::size_t> shape) {
  const std::size_t n = shape_product(shape);
  node_ = std::make_shared<detail::TensorNode>();
  node_->shape = std::move(shape);
  node_->values.assign(n, 0.0);
}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> values) {
  if (shape_product(shape) != values.size()) {
    throw DimensionError("tensor shape does not match number of values");
  }
  node_ = std::make_shared<detail::TensorNode>();
  node_->shape = std::move(shape);
  node_->values = std::move(values);
}

Tensor Tensor::scalar(double value) { return Tensor({1}, {value}); }

Tensor Tensor::full(std::vector<std::size_t> shape, double value) {
  const std::size_t n = shape_product(shape);
  return Tensor(std::move(shape), std::vector<double>(n, value));
}

Tensor Tensor::uniform(std::vector<std::size_t> shape, double lo, double hi, Rng& rng) {
  const std::size_t n = shape_product(shape);
  std::vector<double> values(n);
  for (double& v : values) v = rng.uniform(lo, hi);
  return Tensor(std::move(shape), std::move(values));
}

const std::vector<std::size_t>& Tensor::shape() const { return node_->shape; }

std::size_t Tensor::rank() const { return node_->shape.size(); }

std::size_t Tensor::dim(std::size_t axis) const {
  if (axis >= node_->shape.size()) throw DimensionError("axis out of range");
  return node_->shape[axis];
}

std::size_t Tensor::size() const { return node_->values.size(); }

std::span<const double> Tensor::values() const { return node_->values; }

std::span<double> Tensor::values() { return node_->values; }

double Tensor::value() const {
  if (size() != 1) throw DimensionError("value() requires a scalar tensor");
  return node_->values[0];
}

double Tensor::operator[](std::size_t i) const { return node_->values[i]; }

bool Tensor::requires_grad() const { return node_ && node_->requires_grad; }

Tensor& Tensor::set_requires_grad(bool enabled) {
  node_->requires_grad = enabled;
  return *this;
}

bool Tensor::has_grad() const { return node_ && node_->grad.size() == node_->values.size(); }

std::span<const double> Tensor::grad() const {
  if (!has_grad()) throw Error("tensor has no gradient; run backward() first");
  return node_->grad;
}

void Tensor::zero_grad() {
  if (node_) node_->grad.assign(node_->values.size(), 0.0);
}

Tensor Tensor::detach() const {
  return Tensor(node_->shape, node_->values);
}

Tensor Tensor::from_node(std::shared_ptr<detail::TensorNode> node) {
  Tensor t;
  t.node_ = std::move(node);
  return t;
}

void backward(const Tensor& loss) {
  if (!loss.defined()) throw Error("backward: undefined tensor");
  if (loss.size() != 1) throw DimensionError("backward: loss must be a scalar");
  if (!loss.requires_grad()) {
    throw Error("backward: loss does not require gradients");
  }

  // Post-order over the graph, iteratively to stay stack-safe.
  std::vector<detail::TensorNode*> order;
  std::unordered_set<detail::TensorNode*> visited;
  struct Frame {
    detail::TensorNode* node;
    std::size_t next_parent;
  };
  std::vector<Frame> stack;
  stack.push_back({loss.node().get(), 0});
  visited.insert(loss.node().get());
  while (!stack.empty()) {
    Frame& frame = stack.back();
    if (frame.next_parent < frame.node->parents.size()) {
      detail::TensorNode* parent = frame.node->parents[frame.next_parent++].get();
      if (visited.insert(parent).second) stack.push_back({parent, 0});
    } else {
      order.push_back(frame.node);
      stack.pop_back();
    }
  }

  loss.node()->ensure_grad();
  loss.node()->grad[0] += 1.0;

  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    detail::TensorNode* node = *it;
    if (!node->backward_fn) continue;
    node->ensure_grad();
    node->backward_fn(*node);
  }
}

bool grad_enabled() { return g_grad_enabled; }

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) { g_grad_enabled = false; }

NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }

}  // namespace trimodal
