#pragma once

#include <string>
#include <vector>

#include "trimodal/gradcheck.hpp"

namespace trimodal {

struct OpCheckResult {
  std::string name;
  double max_rel_error = 0.0;
  bool pass = false;
};

// Randomized finite-difference sweeps. Scopes:
//   "ops"   - every differentiable tensor operation
//   "audio" - full audio-channel loss on a two-clip micro-batch
//   "text"  - full text-channel loss (evaluation-mode dropout)
//   "video" - trainable video head loss
//   "fused" - full-backprop fused loss over all trainable parameters
// Each item runs `seeds` independent random configurations; reported is the
// worst scaled relative error seen.
std::vector<OpCheckResult> run_gradcheck_suite(const std::string& scope, std::size_t seeds,
                                               double tolerance = 1e-4);

}  // namespace trimodal
