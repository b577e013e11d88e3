#include "trimodal/ops.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "trimodal/errors.hpp"

namespace trimodal {

namespace {

using detail::TensorNode;
using NodePtr = std::shared_ptr<TensorNode>;

void require_defined(const Tensor& t, const char* what) {
  if (!t.defined()) throw Error(std::string("undefined tensor passed to ") + what);
}

bool any_requires_grad(const std::vector<NodePtr>& parents) {
  for (const auto& p : parents) {
    if (p->requires_grad) return true;
  }
  return false;
}

// Builds the result node; attaches parents and the backward closure only when
// recording is on and some parent participates in differentiation.
Tensor make_result(std::vector<std::size_t> shape, std::vector<double> values,
                   std::vector<NodePtr> parents,
                   std::function<void(TensorNode&)> backward_fn) {
  auto node = std::make_shared<TensorNode>();
  node->shape = std::move(shape);
  node->values = std::move(values);
  if (grad_enabled() && any_requires_grad(parents)) {
    node->requires_grad = true;
    node->parents = std::move(parents);
    node->backward_fn = std::move(backward_fn);
  }
  return Tensor::from_node(std::move(node));
}

void check_same_shape(const Tensor& a, const Tensor& b, const char* what) {
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(what) + ": shape mismatch");
  }
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
  require_defined(a, "add");
  require_defined(b, "add");
  check_same_shape(a, b, "add");
  const std::size_t n = a.size();
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] + b[i];
  NodePtr an = a.node(), bn = b.node();
  return make_result(a.shape(), std::move(out), {an, bn}, [an, bn](TensorNode& self) {
    const std::size_t n = self.size();
    if (an->requires_grad) {
      an->ensure_grad();
      for (std::size_t i = 0; i < n; ++i) an->grad[i] += self.grad[i];
    }
    if (bn->requires_grad) {
      bn->ensure_grad();
      for (std::size_t i = 0; i < n; ++i) bn->grad[i] += self.grad[i];
    }
  });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  require_defined(a, "mul");
  require_defined(b, "mul");
  check_same_shape(a, b, "mul");
  const std::size_t n = a.size();
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * b[i];
  NodePtr an = a.node(), bn = b.node();
  return make_result(a.shape(), std::move(out), {an, bn}, [an, bn](TensorNode& self) {
    const std::size_t n = self.size();
    if (an->requires_grad) {
      an->ensure_grad();
      for (std::size_t i = 0; i < n; ++i) an->grad[i] += self.grad[i] * bn->values[i];
    }
    if (bn->requires_grad) {
      bn->ensure_grad();
      for (std::size_t i = 0; i < n; ++i) bn->grad[i] += self.grad[i] * an->values[i];
    }
  });
}

Tensor scale(const Tensor& x, double factor) {
  require_defined(x, "scale");
  const std::size_t n = x.size();
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = x[i] * factor;
  NodePtr xn = x.node();
  return make_result(x.shape(), std::move(out), {xn}, [xn, factor](TensorNode& self) {
    if (!xn->requires_grad) return;
    xn->ensure_grad();
    for (std::size_t i = 0; i < self.size(); ++i) xn->grad[i] += self.grad[i] * factor;
  });
}

Tensor sum(const Tensor& x) {
  require_defined(x, "sum");
  double total = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) total += x[i];
  NodePtr xn = x.node();
  return make_result({1}, {total}, {xn}, [xn](TensorNode& self) {
    if (!xn->requires_grad) return;
    xn->ensure_grad();
    const double g = self.grad[0];
    for (double& gi : xn->grad) gi += g;
  });
}

std::size_t conv1d_output_length(std::size_t input_length, std::size_t window,
                                 std::size_t stride) {
  if (stride == 0) throw ParameterError("conv1d: stride must be positive");
  if (input_length < window) throw InputTooShortError(input_length, window);
  return (input_length - window) / stride + 1;
}

Tensor conv1d(const Tensor& input, const Tensor& kernels, const Tensor& bias,
              std::size_t stride) {
  require_defined(input, "conv1d");
  require_defined(kernels, "conv1d");
  require_defined(bias, "conv1d");
  if (input.rank() != 2) throw DimensionError("conv1d: input must be [C_in x L]");
  if (kernels.rank() != 3) throw DimensionError("conv1d: kernels must be [C_out x C_in x W]");
  const std::size_t c_in = input.dim(0);
  const std::size_t length = input.dim(1);
  const std::size_t c_out = kernels.dim(0);
  const std::size_t window = kernels.dim(2);
  if (kernels.dim(1) != c_in) {
    throw DimensionError("conv1d: kernel input channels (" + std::to_string(kernels.dim(1)) +
                         ") do not match input channels (" + std::to_string(c_in) + ")");
  }
  if (bias.rank() != 1 || bias.dim(0) != c_out) {
    throw DimensionError("conv1d: bias must be [C_out]");
  }
  const std::size_t l_out = conv1d_output_length(length, window, stride);

  std::vector<double> out(c_out * l_out);
  {
    const double* x = input.values().data();
    const double* k = kernels.values().data();
    const double* b = bias.values().data();
    for (std::size_t oc = 0; oc < c_out; ++oc) {
      const double* koc = k + oc * c_in * window;
      for (std::size_t t = 0; t < l_out; ++t) {
        const std::size_t x0 = t * stride;
        double acc = b[oc];
        for (std::size_t ic = 0; ic < c_in; ++ic) {
          const double* xr = x + ic * length + x0;
          const double* kr = koc + ic * window;
          double s = 0.0;
          for (std::size_t j = 0; j < window; ++j) s += kr[j] * xr[j];
          acc += s;
        }
        out[oc * l_out + t] = acc;
      }
    }
  }

  NodePtr xn = input.node(), kn = kernels.node(), bn = bias.node();
  return make_result(
      {c_out, l_out}, std::move(out), {xn, kn, bn},
      [xn, kn, bn, c_in, length, c_out, window, stride, l_out](TensorNode& self) {
        const double* g = self.grad.data();
        const double* x = xn->values.data();
        const double* k = kn->values.data();
        const bool need_x = xn->requires_grad;
        const bool need_k = kn->requires_grad;
        const bool need_b = bn->requires_grad;
        if (need_x) xn->ensure_grad();
        if (need_k) kn->ensure_grad();
        if (need_b) bn->ensure_grad();
        double* gx = need_x ? xn->grad.data() : nullptr;
        double* gk = need_k ? kn->grad.data() : nullptr;
        double* gb = need_b ? bn->grad.data() : nullptr;
        for (std::size_t oc = 0; oc < c_out; ++oc) {
          const double* koc = k + oc * c_in * window;
          double* gkoc = need_k ? gk + oc * c_in * window : nullptr;
          double bias_acc = 0.0;
          for (std::size_t t = 0; t < l_out; ++t) {
            const double go = g[oc * l_out + t];
            bias_acc += go;
            if (go == 0.0) continue;
            const std::size_t x0 = t * stride;
            for (std::size_t ic = 0; ic < c_in; ++ic) {
              const double* xr = x + ic * length + x0;
              const double* kr = koc + ic * window;
              if (need_k) {
                double* gkr = gkoc + ic * window;
                for (std::size_t j = 0; j < window; ++j) gkr[j] += go * xr[j];
              }
              if (need_x) {
                double* gxr = gx + ic * length + x0;
                for (std::size_t j = 0; j < window; ++j) gxr[j] += go * kr[j];
              }
            }
          }
          if (need_b) gb[oc] += bias_acc;
        }
      });
}

Tensor conv2d(const Tensor& input, const Tensor& kernels, const Tensor& bias,
              std::size_t stride, std::size_t padding) {
  require_defined(input, "conv2d");
  require_defined(kernels, "conv2d");
  require_defined(bias, "conv2d");
  if (stride == 0) throw ParameterError("conv2d: stride must be positive");
  if (input.rank() != 3) throw DimensionError("conv2d: input must be [C_in x H x W]");
  if (kernels.rank() != 4) {
    throw DimensionError("conv2d: kernels must be [C_out x C_in x KH x KW]");
  }
  const std::size_t c_in = input.dim(0);
  const std::size_t h = input.dim(1);
  const std::size_t w = input.dim(2);
  const std::size_t c_out = kernels.dim(0);
  const std::size_t kh = kernels.dim(2);
  const std::size_t kw = kernels.dim(3);
  if (kernels.dim(1) != c_in) throw DimensionError("conv2d: channel mismatch");
  if (bias.rank() != 1 || bias.dim(0) != c_out) throw DimensionError("conv2d: bias must be [C_out]");
  const std::ptrdiff_t h_span = static_cast<std::ptrdiff_t>(h + 2 * padding) -
                                static_cast<std::ptrdiff_t>(kh);
  const std::ptrdiff_t w_span = static_cast<std::ptrdiff_t>(w + 2 * padding) -
                                static_cast<std::ptrdiff_t>(kw);
  if (h_span < 0 || w_span < 0) {
    throw DimensionError("conv2d: non-positive output dimension");
  }
  const std::size_t h_out = static_cast<std::size_t>(h_span) / stride + 1;
  const std::size_t w_out = static_cast<std::size_t>(w_span) / stride + 1;

  std::vector<double> out(c_out * h_out * w_out);
  {
    const double* x = input.values().data();
    const double* k = kernels.values().data();
    const double* b = bias.values().data();
    for (std::size_t oc = 0; oc < c_out; ++oc) {
      for (std::size_t oy = 0; oy < h_out; ++oy) {
        for (std::size_t ox = 0; ox < w_out; ++ox) {
          double acc = b[oc];
          for (std::size_t ic = 0; ic < c_in; ++ic) {
            for (std::size_t ky = 0; ky < kh; ++ky) {
              const std::ptrdiff_t iy =
                  static_cast<std::ptrdiff_t>(oy * stride + ky) - static_cast<std::ptrdiff_t>(padding);
              if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(h)) continue;
              for (std::size_t kx = 0; kx < kw; ++kx) {
                const std::ptrdiff_t ix =
                    static_cast<std::ptrdiff_t>(ox * stride + kx) - static_cast<std::ptrdiff_t>(padding);
                if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(w)) continue;
                acc += k[((oc * c_in + ic) * kh + ky) * kw + kx] *
                       x[(ic * h + static_cast<std::size_t>(iy)) * w + static_cast<std::size_t>(ix)];
              }
            }
          }
          out[(oc * h_out + oy) * w_out + ox] = acc;
        }
      }
    }
  }

  NodePtr xn = input.node(), kn = kernels.node(), bn = bias.node();
  return make_result(
      {c_out, h_out, w_out}, std::move(out), {xn, kn, bn},
      [xn, kn, bn, c_in, h, w, c_out, kh, kw, stride, padding, h_out, w_out](TensorNode& self) {
        const double* g = self.grad.data();
        const double* x = xn->values.data();
        const double* k = kn->values.data();
        const bool need_x = xn->requires_grad;
        const bool need_k = kn->requires_grad;
        const bool need_b = bn->requires_grad;
        if (need_x) xn->ensure_grad();
        if (need_k) kn->ensure_grad();
        if (need_b) bn->ensure_grad();
        for (std::size_t oc = 0; oc < c_out; ++oc) {
          for (std::size_t oy = 0; oy < h_out; ++oy) {
            for (std::size_t ox = 0; ox < w_out; ++ox) {
              const double go = g[(oc * h_out + oy) * w_out + ox];
              if (go == 0.0) continue;
              if (need_b) bn->grad[oc] += go;
              for (std::size_t ic = 0; ic < c_in; ++ic) {
                for (std::size_t ky = 0; ky < kh; ++ky) {
                  const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(oy * stride + ky) -
                                            static_cast<std::ptrdiff_t>(padding);
                  if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(h)) continue;
                  for (std::size_t kx = 0; kx < kw; ++kx) {
                    const std::ptrdiff_t ix = static_cast<std::ptrdiff_t>(ox * stride + kx) -
                                              static_cast<std::ptrdiff_t>(padding);
                    if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(w)) continue;
                    const std::size_t ki = ((oc * c_in + ic) * kh + ky) * kw + kx;
                    const std::size_t xi =
                        (ic * h + static_cast<std::size_t>(iy)) * w + static_cast<std::size_t>(ix);
                    if (need_k) kn->grad[ki] += go * x[xi];
                    if (need_x) xn->grad[xi] += go * k[ki];
                  }
                }
              }
            }
          }
        }
      });
}

Tensor max_pool2d(const Tensor& input, std::size_t window) {
  require_defined(input, "max_pool2d");
  if (window == 0) throw ParameterError("max_pool2d: window must be positive");
  if (input.rank() != 3) throw DimensionError("max_pool2d: input must be [C x H x W]");
  const std::size_t c = input.dim(0);
  const std::size_t h = input.dim(1);
  const std::size_t w = input.dim(2);
  const std::size_t h_out = h / window;
  const std::size_t w_out = w / window;
  if (h_out == 0 || w_out == 0) throw DimensionError("max_pool2d: window larger than input");

  std::vector<double> out(c * h_out * w_out);
  std::vector<std::size_t> argmax(out.size());
  const double* x = input.values().data();
  for (std::size_t ic = 0; ic < c; ++ic) {
    for (std::size_t oy = 0; oy < h_out; ++oy) {
      for (std::size_t ox = 0; ox < w_out; ++ox) {
        std::size_t best_idx = (ic * h + oy * window) * w + ox * window;
        double best = x[best_idx];
        for (std::size_t ky = 0; ky < window; ++ky) {
          for (std::size_t kx = 0; kx < window; ++kx) {
            const std::size_t xi = (ic * h + oy * window + ky) * w + ox * window + kx;
            if (x[xi] > best) {
              best = x[xi];
              best_idx = xi;
            }
          }
        }
        const std::size_t oi = (ic * h_out + oy) * w_out + ox;
        out[oi] = best;
        argmax[oi] = best_idx;
      }
    }
  }

  NodePtr xn = input.node();
  return make_result({c, h_out, w_out}, std::move(out), {xn},
                     [xn, argmax = std::move(argmax)](TensorNode& self) {
                       if (!xn->requires_grad) return;
                       xn->ensure_grad();
                       for (std::size_t i = 0; i < self.size(); ++i) {
                         xn->grad[argmax[i]] += self.grad[i];
                       }
                     });
}

Tensor fully_connected(const Tensor& input, const Tensor& weights, const Tensor& bias) {
  require_defined(input, "fully_connected");
  require_defined(weights, "fully_connected");
  require_defined(bias, "fully_connected");
  if (input.rank() != 1) throw DimensionError("fully_connected: input must be a vector");
  if (weights.rank() != 2) throw DimensionError("fully_connected: weights must be [m x n]");
  const std::size_t n = input.dim(0);
  const std::size_t m = weights.dim(0);
  if (weights.dim(1) != n) {
    throw DimensionError("fully_connected: weights expect input of length " +
                         std::to_string(weights.dim(1)) + ", got " + std::to_string(n));
  }
  if (bias.rank() != 1 || bias.dim(0) != m) throw DimensionError("fully_connected: bias must be [m]");

  std::vector<double> out(m);
  {
    const double* x = input.values().data();
    const double* wv = weights.values().data();
    const double* b = bias.values().data();
    for (std::size_t i = 0; i < m; ++i) {
      const double* row = wv + i * n;
      double acc = b[i];
      for (std::size_t j = 0; j < n; ++j) acc += row[j] * x[j];
      out[i] = acc;
    }
  }

  NodePtr xn = input.node(), wn = weights.node(), bn = bias.node();
  return make_result({m}, std::move(out), {xn, wn, bn}, [xn, wn, bn, m, n](TensorNode& self) {
    const double* g = self.grad.data();
    const bool need_x = xn->requires_grad;
    const bool need_w = wn->requires_grad;
    const bool need_b = bn->requires_grad;
    if (need_x) xn->ensure_grad();
    if (need_w) wn->ensure_grad();
    if (need_b) bn->ensure_grad();
    for (std::size_t i = 0; i < m; ++i) {
      const double gi = g[i];
      if (need_b) bn->grad[i] += gi;
      if (gi == 0.0) continue;
      const double* row = wn->values.data() + i * n;
      if (need_w) {
        double* grow = wn->grad.data() + i * n;
        const double* x = xn->values.data();
        for (std::size_t j = 0; j < n; ++j) grow[j] += gi * x[j];
      }
      if (need_x) {
        double* gx = xn->grad.data();
        for (std::size_t j = 0; j < n; ++j) gx[j] += gi * row[j];
      }
    }
  });
}

Tensor sigmoid(const Tensor& x) {
  require_defined(x, "sigmoid");
  const std::size_t n = x.size();
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = 1.0 / (1.0 + std::exp(-x[i]));
  NodePtr xn = x.node();
  return make_result(x.shape(), std::move(out), {xn}, [xn](TensorNode& self) {
    if (!xn->requires_grad) return;
    xn->ensure_grad();
    for (std::size_t i = 0; i < self.size(); ++i) {
      const double y = self.values[i];
      xn->grad[i] += self.grad[i] * y * (1.0 - y);
    }
  });
}

Tensor relu(const Tensor& x) {
  require_defined(x, "relu");
  const std::size_t n = x.size();
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = x[i] > 0.0 ? x[i] : 0.0;
  NodePtr xn = x.node();
  return make_result(x.shape(), std::move(out), {xn}, [xn](TensorNode& self) {
    if (!xn->requires_grad) return;
    xn->ensure_grad();
    for (std::size_t i = 0; i < self.size(); ++i) {
      if (xn->values[i] > 0.0) xn->grad[i] += self.grad[i];
    }
  });
}

Tensor global_avg_pool(const Tensor& input) {
  require_defined(input, "global_avg_pool");
  if (input.rank() != 2) throw DimensionError("global_avg_pool: input must be [C x L]");
  const std::size_t c = input.dim(0);
  const std::size_t l = input.dim(1);
  std::vector<double> out(c);
  const double* x = input.values().data();
  for (std::size_t ic = 0; ic < c; ++ic) {
    double acc = 0.0;
    for (std::size_t t = 0; t < l; ++t) acc += x[ic * l + t];
    out[ic] = acc / static_cast<double>(l);
  }
  NodePtr xn = input.node();
  return make_result({c}, std::move(out), {xn}, [xn, c, l](TensorNode& self) {
    if (!xn->requires_grad) return;
    xn->ensure_grad();
    const double inv = 1.0 / static_cast<double>(l);
    for (std::size_t ic = 0; ic < c; ++ic) {
      const double g = self.grad[ic] * inv;
      double* gx = xn->grad.data() + ic * l;
      for (std::size_t t = 0; t < l; ++t) gx[t] += g;
    }
  });
}

Tensor max_over_time(const Tensor& input) {
  require_defined(input, "max_over_time");
  if (input.rank() != 2) throw DimensionError("max_over_time: input must be [C x L]");
  const std::size_t c = input.dim(0);
  const std::size_t l = input.dim(1);
  std::vector<double> out(c);
  std::vector<std::size_t> argmax(c);
  const double* x = input.values().data();
  for (std::size_t ic = 0; ic < c; ++ic) {
    std::size_t best = 0;
    double best_val = x[ic * l];
    for (std::size_t t = 1; t < l; ++t) {
      if (x[ic * l + t] > best_val) {
        best_val = x[ic * l + t];
        best = t;
      }
    }
    out[ic] = best_val;
    argmax[ic] = best;
  }
  NodePtr xn = input.node();
  return make_result({c}, std::move(out), {xn},
                     [xn, l, argmax = std::move(argmax)](TensorNode& self) {
                       if (!xn->requires_grad) return;
                       xn->ensure_grad();
                       for (std::size_t ic = 0; ic < self.size(); ++ic) {
                         xn->grad[ic * l + argmax[ic]] += self.grad[ic];
                       }
                     });
}

Tensor dropout(const Tensor& x, double p, bool training, Rng& rng) {
  require_defined(x, "dropout");
  if (p < 0.0 || p >= 1.0) throw ParameterError("dropout: p must lie in [0, 1)");
  if (!training || p == 0.0) return x;
  const std::size_t n = x.size();
  const double keep_scale = 1.0 / (1.0 - p);
  std::vector<double> mask(n);
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    mask[i] = rng.uniform() < p ? 0.0 : keep_scale;
    out[i] = x[i] * mask[i];
  }
  NodePtr xn = x.node();
  return make_result(x.shape(), std::move(out), {xn},
                     [xn, mask = std::move(mask)](TensorNode& self) {
                       if (!xn->requires_grad) return;
                       xn->ensure_grad();
                       for (std::size_t i = 0; i < self.size(); ++i) {
                         xn->grad[i] += self.grad[i] * mask[i];
                       }
                     });
}

Tensor concat(const std::vector<Tensor>& parts) {
  if (parts.empty()) throw ParameterError("concat: needs at least one part");
  std::size_t total = 0;
  for (const Tensor& p : parts) {
    require_defined(p, "concat");
    total += p.size();
  }
  std::vector<double> out;
  out.reserve(total);
  std::vector<NodePtr> parents;
  parents.reserve(parts.size());
  for (const Tensor& p : parts) {
    out.insert(out.end(), p.values().begin(), p.values().end());
    parents.push_back(p.node());
  }
  auto parent_copy = parents;
  return make_result({total}, std::move(out), std::move(parents),
                     [segments = std::move(parent_copy)](TensorNode& self) {
                       std::size_t offset = 0;
                       for (const NodePtr& seg : segments) {
                         const std::size_t n = seg->size();
                         if (seg->requires_grad) {
                           seg->ensure_grad();
                           for (std::size_t i = 0; i < n; ++i) {
                             seg->grad[i] += self.grad[offset + i];
                           }
                         }
                         offset += n;
                       }
                     });
}

Tensor average(const std::vector<Tensor>& parts) {
  if (parts.empty()) throw ParameterError("average: needs at least one part");
  for (const Tensor& p : parts) require_defined(p, "average");
  for (std::size_t i = 1; i < parts.size(); ++i) check_same_shape(parts[0], parts[i], "average");
  const std::size_t n = parts[0].size();
  const double inv = 1.0 / static_cast<double>(parts.size());
  std::vector<double> out(n, 0.0);
  std::vector<NodePtr> parents;
  parents.reserve(parts.size());
  for (const Tensor& p : parts) {
    for (std::size_t i = 0; i < n; ++i) out[i] += p[i];
    parents.push_back(p.node());
  }
  for (double& v : out) v *= inv;
  auto parent_copy = parents;
  return make_result(parts[0].shape(), std::move(out), std::move(parents),
                     [inv, members = std::move(parent_copy)](TensorNode& self) {
                       for (const NodePtr& m : members) {
                         if (!m->requires_grad) continue;
                         m->ensure_grad();
                         for (std::size_t i = 0; i < self.size(); ++i) {
                           m->grad[i] += self.grad[i] * inv;
                         }
                       }
                     });
}

Tensor softmax(const Tensor& logits) {
  require_defined(logits, "softmax");
  if (logits.rank() != 1) throw DimensionError("softmax: input must be a vector");
  const std::size_t n = logits.size();
  double max_logit = logits[0];
  for (std::size_t i = 1; i < n; ++i) max_logit = std::max(max_logit, logits[i]);
  std::vector<double> out(n);
  double denom = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = std::exp(logits[i] - max_logit);
    denom += out[i];
  }
  for (double& v : out) v /= denom;
  NodePtr xn = logits.node();
  return make_result({n}, std::move(out), {xn}, [xn](TensorNode& self) {
    if (!xn->requires_grad) return;
    xn->ensure_grad();
    double dot = 0.0;
    for (std::size_t i = 0; i < self.size(); ++i) dot += self.grad[i] * self.values[i];
    for (std::size_t i = 0; i < self.size(); ++i) {
      xn->grad[i] += self.values[i] * (self.grad[i] - dot);
    }
  });
}

Tensor weighted_sum(const Tensor& weights, const std::vector<Tensor>& vectors) {
  require_defined(weights, "weighted_sum");
  if (weights.rank() != 1) throw DimensionError("weighted_sum: weights must be a vector");
  if (weights.size() != vectors.size()) {
    throw DimensionError("weighted_sum: weight count does not match vector count");
  }
  if (vectors.empty()) throw ParameterError("weighted_sum: needs at least one vector");
  for (const Tensor& v : vectors) require_defined(v, "weighted_sum");
  for (std::size_t i = 1; i < vectors.size(); ++i) {
    check_same_shape(vectors[0], vectors[i], "weighted_sum");
  }
  const std::size_t n = vectors[0].size();
  const std::size_t k = vectors.size();
  std::vector<double> out(n, 0.0);
  for (std::size_t i = 0; i < k; ++i) {
    const double wi = weights[i];
    for (std::size_t j = 0; j < n; ++j) out[j] += wi * vectors[i][j];
  }
  std::vector<NodePtr> parents;
  parents.reserve(k + 1);
  NodePtr wn = weights.node();
  parents.push_back(wn);
  std::vector<NodePtr> vns;
  vns.reserve(k);
  for (const Tensor& v : vectors) {
    parents.push_back(v.node());
    vns.push_back(v.node());
  }
  return make_result(vectors[0].shape(), std::move(out), std::move(parents),
                     [wn, vns = std::move(vns), n](TensorNode& self) {
                       if (wn->requires_grad) wn->ensure_grad();
                       for (std::size_t i = 0; i < vns.size(); ++i) {
                         const NodePtr& vn = vns[i];
                         if (wn->requires_grad) {
                           double dot = 0.0;
                           for (std::size_t j = 0; j < n; ++j) dot += self.grad[j] * vn->values[j];
                           wn->grad[i] += dot;
                         }
                         if (vn->requires_grad) {
                           vn->ensure_grad();
                           const double wi = wn->values[i];
                           for (std::size_t j = 0; j < n; ++j) vn->grad[j] += wi * self.grad[j];
                         }
                       }
                     });
}

Tensor reshape(const Tensor& x, std::vector<std::size_t> shape) {
  require_defined(x, "reshape");
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  if (n != x.size()) throw DimensionError("reshape: element count mismatch");
  NodePtr xn = x.node();
  std::vector<double> out(x.values().begin(), x.values().end());
  return make_result(std::move(shape), std::move(out), {xn}, [xn](TensorNode& self) {
    if (!xn->requires_grad) return;
    xn->ensure_grad();
    for (std::size_t i = 0; i < self.size(); ++i) xn->grad[i] += self.grad[i];
  });
}

Tensor mse_over_traits(const Tensor& pred, const Tensor& label) {
  require_defined(pred, "mse_over_traits");
  require_defined(label, "mse_over_traits");
  check_same_shape(pred, label, "mse_over_traits");
  if (pred.size() != 5) {
    throw DimensionError("mse_over_traits: expected five trait scores");
  }
  const std::size_t n = pred.size();
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = pred[i] - label[i];
    acc += d * d;
  }
  acc /= static_cast<double>(n);
  NodePtr pn = pred.node(), ln = label.node();
  return make_result({1}, {acc}, {pn, ln}, [pn, ln, n](TensorNode& self) {
    const double g = self.grad[0] * 2.0 / static_cast<double>(n);
    if (pn->requires_grad) {
      pn->ensure_grad();
      for (std::size_t i = 0; i < n; ++i) pn->grad[i] += g * (pn->values[i] - ln->values[i]);
    }
    if (ln->requires_grad) {
      ln->ensure_grad();
      for (std::size_t i = 0; i < n; ++i) ln->grad[i] -= g * (pn->values[i] - ln->values[i]);
    }
  });
}

}  // namespace trimodal
