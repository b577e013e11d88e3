#pragma once

#include <vector>

#include "trimodal/rng.hpp"
#include "trimodal/tensor.hpp"

namespace trimodal {

// Differentiable tensor operations. Every function validates shapes, computes
// the forward value, and records a reverse-mode closure when grad recording is
// enabled and some input requires gradients.

Tensor add(const Tensor& a, const Tensor& b);   // elementwise, same shape
Tensor mul(const Tensor& a, const Tensor& b);   // elementwise, same shape
Tensor scale(const Tensor& x, double factor);
Tensor sum(const Tensor& x);                    // -> scalar

// Valid 1-D cross-correlation. input [C_in x L], kernels [C_out x C_in x W],
// bias [C_out]; output [C_out x L_out] with L_out = (L - W) / stride + 1.
Tensor conv1d(const Tensor& input, const Tensor& kernels, const Tensor& bias,
              std::size_t stride);
std::size_t conv1d_output_length(std::size_t input_length, std::size_t window,
                                 std::size_t stride);

// 2-D cross-correlation with zero padding. input [C_in x H x W], kernels
// [C_out x C_in x KH x KW], bias [C_out].
Tensor conv2d(const Tensor& input, const Tensor& kernels, const Tensor& bias,
              std::size_t stride, std::size_t padding);

// Max pooling with square window and stride equal to the window.
Tensor max_pool2d(const Tensor& input, std::size_t window);

// weights [m x n] * input [n] + bias [m] -> [m]
Tensor fully_connected(const Tensor& input, const Tensor& weights, const Tensor& bias);

Tensor sigmoid(const Tensor& x);
Tensor relu(const Tensor& x);  // subgradient at 0 is 0

Tensor global_avg_pool(const Tensor& input);  // [C x L] -> [C]

// Per-channel maximum over the time axis; gradient flows to the argmax only,
// ties resolved toward the lowest index.
Tensor max_over_time(const Tensor& input);  // [C x L] -> [C]

// Inverted dropout: in training, zeroes each element with probability p and
// scales survivors by 1/(1-p); in evaluation it is the identity.
Tensor dropout(const Tensor& x, double p, bool training, Rng& rng);

// Order-preserving concatenation into a flat vector; gradient splits back by
// segment.
Tensor concat(const std::vector<Tensor>& parts);

// Elementwise mean of same-shape tensors.
Tensor average(const std::vector<Tensor>& parts);

Tensor softmax(const Tensor& logits);  // 1-D

// sum_i weights[i] * vectors[i]; all vectors share one shape.
Tensor weighted_sum(const Tensor& weights, const std::vector<Tensor>& vectors);

Tensor reshape(const Tensor& x, std::vector<std::size_t> shape);

// Mean squared error over the five trait scores: (1/5) * sum (pred - label)^2.
Tensor mse_over_traits(const Tensor& pred, const Tensor& label);

}  // namespace trimodal
