#include "iternet/optim.hpp"

#include <cmath>

#include "iternet/errors.hpp"

namespace iternet::training {

void zero_gradients(std::vector<Tensor>& params) {
  for (Tensor& p : params) p.zero_grad();
}

double global_grad_norm(const std::vector<Tensor>& params) {
  double sq = 0.0;
  for (const Tensor& p : params) {
    for (double g : p.grad_vector()) sq += g * g;
  }
  return std::sqrt(sq);
}

void clip_gradients(std::vector<Tensor>& params, double max_norm) {
  const double norm = global_grad_norm(params);
  if (norm <= max_norm) return;
  const double scale = max_norm / norm;
  for (Tensor& p : params) {
    double* g = p.grad();
    for (std::int64_t i = 0; i < p.size(); ++i) g[i] *= scale;
  }
}

void clip_gradients_elementwise(std::vector<Tensor>& params, double max_abs) {
  for (Tensor& p : params) {
    double* g = p.grad();
    for (std::int64_t i = 0; i < p.size(); ++i) {
      if (g[i] > max_abs) g[i] = max_abs;
      else if (g[i] < -max_abs) g[i] = -max_abs;
    }
  }
}

AdamState AdamState::init(const std::vector<Tensor>& params) {
  AdamState state;
  for (const Tensor& p : params) {
    state.first_moment.push_back(Tensor(p.shape()));
    state.second_moment.push_back(Tensor(p.shape()));
  }
  return state;
}

void adam_step(std::vector<Tensor>& params, AdamState& state, double lr, double weight_decay,
               double beta1, double beta2, double eps) {
  if (state.first_moment.size() != params.size()) throw ConfigError("adam_step: state/parameter mismatch");
  ++state.step;
  const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(state.step));
  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    Tensor& p = params[pi];
    if (!state.first_moment[pi].same_shape(p)) throw ConfigError("adam_step: state shape mismatch");
    double* value = p.data();
    const double* g = p.grad();
    double* m = state.first_moment[pi].data();
    double* v = state.second_moment[pi].data();
    for (std::int64_t i = 0; i < p.size(); ++i) {
      value[i] -= lr * weight_decay * value[i];
      m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
      v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
      value[i] -= lr * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + eps);
    }
  }
}

MomentumState MomentumState::init(const std::vector<Tensor>& params) {
  MomentumState state;
  for (const Tensor& p : params) state.velocity.push_back(Tensor(p.shape()));
  return state;
}

void sgd_momentum_step(std::vector<Tensor>& params, MomentumState& state, double lr, double momentum,
                       double weight_decay) {
  if (state.velocity.size() != params.size()) throw ConfigError("sgd_momentum_step: state/parameter mismatch");
  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    Tensor& p = params[pi];
    if (!state.velocity[pi].same_shape(p)) throw ConfigError("sgd_momentum_step: state shape mismatch");
    double* value = p.data();
    const double* g = p.grad();
    double* v = state.velocity[pi].data();
    for (std::int64_t i = 0; i < p.size(); ++i) {
      v[i] = momentum * v[i] + (g[i] + weight_decay * value[i]);
      value[i] -= lr * v[i];
    }
  }
}

}  // namespace iternet::training
