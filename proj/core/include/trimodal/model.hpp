#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "trimodal/clip.hpp"
#include "trimodal/optimizer.hpp"
#include "trimodal/rng.hpp"
#include "trimodal/tensor.hpp"

namespace trimodal {

// A channel's two outputs: the feature vector below the trait head, and the
// five sigmoid trait scores.
struct ChannelOutput {
  Tensor penultimate;
  Tensor traits;
};

// Common surface of the trainable models (three channels and the fused
// networks). forward() keeps the result connected to the parameter graph so
// that a loss on it can backpropagate; in evaluation mode (training == false)
// the output is deterministic.
class TraitModel {
 public:
  virtual ~TraitModel() = default;

  virtual std::string kind() const = 0;
  virtual Tensor forward(const ClipData& clip, bool training, Rng& rng) = 0;
  virtual std::vector<Parameter*> parameters() = 0;
  virtual std::map<std::string, std::string> config_map() const = 0;
};

inline std::vector<Parameter*> trainable_parameters(const std::vector<Parameter*>& params) {
  std::vector<Parameter*> out;
  for (Parameter* p : params) {
    if (!p->frozen) out.push_back(p);
  }
  return out;
}

}  // namespace trimodal
