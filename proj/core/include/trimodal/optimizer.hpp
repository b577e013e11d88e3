#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "trimodal/tensor.hpp"

namespace trimodal {

// A named leaf tensor of a model. Frozen parameters take part in forward
// passes but receive no gradients and no optimizer updates; they stay
// bit-identical through any number of training steps.
struct Parameter {
  Parameter() = default;
  Parameter(std::string name, Tensor tensor, bool frozen = false)
      : name(std::move(name)), tensor(std::move(tensor)), frozen(frozen) {
    this->tensor.set_requires_grad(!frozen);
  }

  void set_frozen(bool value) {
    frozen = value;
    tensor.set_requires_grad(!value);
  }

  std::string name;
  Tensor tensor;
  bool frozen = false;
};

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Adam with bias correction. Moment buffers are keyed by parameter name; the
// step counter advances exactly once per step() call.
class Adam {
 public:
  explicit Adam(AdamConfig config = {}) : config_(config) {}

  // One update over all non-frozen parameters, consuming their accumulated
  // gradients. Missing gradients count as zero.
  void step(const std::vector<Parameter*>& params);

  long long step_count() const { return t_; }
  const AdamConfig& config() const { return config_; }

 private:
  struct Moments {
    std::vector<double> m;
    std::vector<double> v;
  };

  AdamConfig config_;
  long long t_ = 0;
  std::unordered_map<std::string, Moments> moments_;
};

void zero_gradients(const std::vector<Parameter*>& params);

}  // namespace trimodal
