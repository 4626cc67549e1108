#pragma once

#include <cstdint>
#include <vector>

#include "iternet/tensor.hpp"

namespace iternet::training {

void zero_gradients(std::vector<Tensor>& params);

// L2 norm over the concatenation of every parameter gradient.
double global_grad_norm(const std::vector<Tensor>& params);

// Global-norm clipping: rescales all gradients by max_norm/‖g‖ when the
// joint norm exceeds max_norm, leaving the direction unchanged.
void clip_gradients(std::vector<Tensor>& params, double max_norm = 1.0);

// Per-coordinate clamp to [-max_abs, max_abs]; ablation alternative to the
// global rescale.
void clip_gradients_elementwise(std::vector<Tensor>& params, double max_abs);

struct AdamState {
  std::vector<Tensor> first_moment;
  std::vector<Tensor> second_moment;
  std::int64_t step = 0;

  static AdamState init(const std::vector<Tensor>& params);
};

// Bias-corrected Adam with decoupled weight decay (lr * wd * param is
// subtracted separately from the moment update).
void adam_step(std::vector<Tensor>& params, AdamState& state, double lr, double weight_decay,
               double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

struct MomentumState {
  std::vector<Tensor> velocity;

  static MomentumState init(const std::vector<Tensor>& params);
};

// v <- momentum * v + (grad + wd * param); param <- param - lr * v.
void sgd_momentum_step(std::vector<Tensor>& params, MomentumState& state, double lr,
                       double momentum = 0.9, double weight_decay = 2e-4);

}  // namespace iternet::training
