#include "iternet/grad_check.hpp"

#include <cmath>
#include <cstdint>

#include "iternet/errors.hpp"

namespace iternet {

double grad_check(const std::function<Tensor()>& f, std::vector<Tensor> params, double eps) {
  std::vector<std::vector<double>> autodiff;
  {
    Tape tape;
    for (Tensor& p : params) {
      p.set_requires_grad(true);
      p.zero_grad();
    }
    Tensor loss = f();
    backward(loss);
    for (Tensor& p : params) {
      p.grad();  // materialize zeros for parameters the loss never touched
      autodiff.push_back(p.grad_vector());
    }
  }

  double worst = 0.0;
  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    Tensor& p = params[pi];
    p.set_requires_grad(false);
    for (std::int64_t i = 0; i < p.size(); ++i) {
      const double saved = p[i];
      p[i] = saved + eps;
      const double hi = f().item();
      p[i] = saved - eps;
      const double lo = f().item();
      p[i] = saved;
      const double fd = (hi - lo) / (2.0 * eps);
      const double err = std::abs(autodiff[pi][static_cast<std::size_t>(i)] - fd) / std::max(1.0, std::abs(fd));
      worst = std::max(worst, err);
    }
    p.set_requires_grad(true);
  }
  return worst;
}

}  // namespace iternet
