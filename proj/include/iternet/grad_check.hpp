#pragma once

#include <functional>
#include <vector>

#include "iternet/tensor.hpp"

namespace iternet {

// Compares reverse-mode gradients against central finite differences.
//
// f must be a deterministic scalar-valued function of the given parameter
// tensors (re-evaluated many times). Returns the maximum over all parameter
// coordinates of |autodiff - central difference| / max(1, |central difference|)
// with step eps.
double grad_check(const std::function<Tensor()>& f, std::vector<Tensor> params, double eps = 1e-5);

}  // namespace iternet
