#pragma once

#include <functional>
#include <string>
#include <vector>

#include "trimodal/optimizer.hpp"
#include "trimodal/tensor.hpp"

namespace trimodal {

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::size_t worst_input = 0;  // index into the checked tensor list
  std::size_t worst_coord = 0;
  std::size_t coords_checked = 0;
};

// Scaled relative error used throughout the gradient checks:
// |a - b| / max(1, |a|, |b|).
double gradcheck_rel_error(double a, double b);

// Compares the reverse-mode gradient of a scalar-valued function against
// central finite differences (f(x+h) - f(x-h)) / (2h), coordinate by
// coordinate. `f` must be a pure function of the given inputs (stochastic
// pieces must re-seed internally). When max_coords_per_tensor is nonzero,
// a deterministic random subset of coordinates is probed instead of all of
// them, which keeps checks over large parameter tensors affordable.
GradCheckReport finite_diff_check(
    const std::function<Tensor(const std::vector<Tensor>&)>& f,
    const std::vector<Tensor>& point, double h = 1e-5,
    std::size_t max_coords_per_tensor = 0, std::uint64_t coord_seed = 0);

// Same check, phrased over a model's parameters: loss_fn() rebuilds the loss
// from the parameters' current values.
GradCheckReport finite_diff_check_params(
    const std::function<Tensor()>& loss_fn, const std::vector<Parameter*>& params,
    double h = 1e-5, std::size_t max_coords_per_tensor = 0, std::uint64_t coord_seed = 0);

}  // namespace trimodal
