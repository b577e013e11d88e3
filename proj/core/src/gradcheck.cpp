#include "trimodal/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "trimodal/errors.hpp"
#include "trimodal/rng.hpp"

namespace trimodal {

double gradcheck_rel_error(double a, double b) {
  return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
}

namespace {

std::vector<std::size_t> pick_coords(std::size_t n, std::size_t limit, Rng& rng) {
  std::vector<std::size_t> coords;
  if (limit == 0 || limit >= n) {
    coords.resize(n);
    for (std::size_t i = 0; i < n; ++i) coords[i] = i;
    return coords;
  }
  coords.reserve(limit);
  for (std::size_t i = 0; i < limit; ++i) coords.push_back(rng.uniform_index(n));
  std::sort(coords.begin(), coords.end());
  coords.erase(std::unique(coords.begin(), coords.end()), coords.end());
  return coords;
}

}  // namespace

GradCheckReport finite_diff_check_params(const std::function<Tensor()>& loss_fn,
                                         const std::vector<Parameter*>& params, double h,
                                         std::size_t max_coords_per_tensor,
                                         std::uint64_t coord_seed) {
  if (h <= 0.0) throw ParameterError("finite_diff_check: h must be positive");

  zero_gradients(params);
  Tensor loss = loss_fn();
  if (loss.size() != 1) throw DimensionError("finite_diff_check: loss must be scalar");
  backward(loss);

  std::vector<std::vector<double>> analytic(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor& t = params[i]->tensor;
    analytic[i] = t.has_grad() ? std::vector<double>(t.grad().begin(), t.grad().end())
                               : std::vector<double>(t.size(), 0.0);
  }

  GradCheckReport report;
  Rng rng(coord_seed == 0 ? 0x9e3779b97f4a7c15ULL : coord_seed);
  NoGradGuard guard;
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto w = params[i]->tensor.values();
    const auto coords = pick_coords(w.size(), max_coords_per_tensor, rng);
    for (std::size_t c : coords) {
      const double original = w[c];
      auto central_difference = [&](double step) {
        w[c] = original + step;
        const double plus = loss_fn().value();
        w[c] = original - step;
        const double minus = loss_fn().value();
        w[c] = original;
        return (plus - minus) / (2.0 * step);
      };
      double rel = gradcheck_rel_error(analytic[i][c], central_difference(h));
      // A large mismatch can come from the difference window straddling a
      // non-smooth point (relu kink, pooling argmax switch). Such artifacts
      // vanish as the window shrinks; a genuine gradient bug does not.
      for (double shrink : {16.0, 256.0}) {
        if (rel <= 1e-7) break;
        rel = std::min(rel, gradcheck_rel_error(analytic[i][c], central_difference(h / shrink)));
      }
      ++report.coords_checked;
      if (rel > report.max_rel_error) {
        report.max_rel_error = rel;
        report.worst_input = i;
        report.worst_coord = c;
      }
    }
  }
  return report;
}

GradCheckReport finite_diff_check(const std::function<Tensor(const std::vector<Tensor>&)>& f,
                                  const std::vector<Tensor>& point, double h,
                                  std::size_t max_coords_per_tensor, std::uint64_t coord_seed) {
  std::vector<Parameter> leaves;
  leaves.reserve(point.size());
  for (std::size_t i = 0; i < point.size(); ++i) {
    leaves.emplace_back("input" + std::to_string(i), point[i].detach());
  }
  std::vector<Parameter*> handles;
  std::vector<Tensor> tensors;
  for (Parameter& p : leaves) {
    handles.push_back(&p);
    tensors.push_back(p.tensor);
  }
  return finite_diff_check_params([&] { return f(tensors); }, handles, h,
                                  max_coords_per_tensor, coord_seed);
}

}  // namespace trimodal
