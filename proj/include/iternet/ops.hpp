#pragma once

#include <cstdint>
#include <span>

#include "iternet/tensor.hpp"

namespace iternet {

// One-dimensional cross-correlation, stride 1, no bias.
// input [C_in x L], kernel [C_out x C_in x K] with K odd,
// padding must equal dilation*(K-1)/2 so the output is [C_out x L].
Tensor conv1d(const Tensor& input, const Tensor& kernel, int padding, int dilation = 1);

// Two-dimensional cross-correlation, stride 1, no bias.
// input [C_in x H x W], kernel [C_out x C_in x K x K] with K odd,
// padding must equal dilation*(K-1)/2 so the output is [C_out x H x W].
Tensor conv2d(const Tensor& input, const Tensor& kernel, int padding, int dilation = 1);

// Elementwise max(0, x). Backward passes gradient where x > 0 and zero
// elsewhere, including at x == 0.
Tensor relu(const Tensor& x);

// Elementwise sum of two same-shape tensors.
Tensor add(const Tensor& a, const Tensor& b);

// Elementwise product of two same-shape tensors.
Tensor mul(const Tensor& a, const Tensor& b);

// Sum of all elements, as a scalar tensor.
Tensor sum(const Tensor& x);

// Mean over positions of -log softmax(logits)[target]. logits must have a
// leading 2-class axis over P positions ([2 x P...]), target holds one {0,1}
// label per position. Stabilized with log-sum-exp so saturated logits stay
// finite.
Tensor per_position_cross_entropy(const Tensor& logits, std::span<const std::uint8_t> target);

}  // namespace iternet
