#include "trimodal/optimizer.hpp"

#include <cmath>

#include "trimodal/errors.hpp"

namespace trimodal {

void Adam::step(const std::vector<Parameter*>& params) {
  ++t_;
  const double bias1 = 1.0 - std::pow(config_.beta1, static_cast<double>(t_));
  const double bias2 = 1.0 - std::pow(config_.beta2, static_cast<double>(t_));
  for (Parameter* param : params) {
    if (param->frozen) continue;
    Tensor& tensor = param->tensor;
    const std::size_t n = tensor.size();
    if (tensor.has_grad() && tensor.grad().size() != n) {
      throw DimensionError("adam: gradient shape does not match parameter " + param->name);
    }
    Moments& slot = moments_[param->name];
    if (slot.m.size() != n) {
      slot.m.assign(n, 0.0);
      slot.v.assign(n, 0.0);
    }
    if (!tensor.has_grad()) continue;  // zero gradient: moments decay to zero anyway
    const auto g = tensor.grad();
    auto w = tensor.values();
    for (std::size_t i = 0; i < n; ++i) {
      slot.m[i] = config_.beta1 * slot.m[i] + (1.0 - config_.beta1) * g[i];
      slot.v[i] = config_.beta2 * slot.v[i] + (1.0 - config_.beta2) * g[i] * g[i];
      const double m_hat = slot.m[i] / bias1;
      const double v_hat = slot.v[i] / bias2;
      w[i] -= config_.lr * m_hat / (std::sqrt(v_hat) + config_.epsilon);
    }
  }
}

void zero_gradients(const std::vector<Parameter*>& params) {
  for (Parameter* param : params) param->tensor.zero_grad();
}

}  // namespace trimodal
