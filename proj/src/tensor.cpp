#include "iternet/tensor.hpp"

#include <cmath>
#include <numeric>
#include <sstream>
#include <utility>

#include "iternet/errors.hpp"

namespace iternet {

std::int64_t numel(const std::vector<int>& shape) {
  std::int64_t n = 1;
  for (int d : shape) n *= d;
  return n;
}

std::string shape_string(const std::vector<int>& shape) {
  std::ostringstream os;
  os << "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << "x";
    os << shape[i];
  }
  os << "]";
  return os.str();
}

Tensor::Tensor(std::vector<int> shape) {
  for (int d : shape) {
    if (d <= 0) throw ConfigError("tensor extent must be positive, got shape " + shape_string(shape));
  }
  d_ = std::make_shared<detail::TensorData>();
  d_->values.assign(static_cast<std::size_t>(numel(shape)), 0.0);
  d_->shape = std::move(shape);
}

Tensor Tensor::from(std::vector<int> shape, std::vector<double> values) {
  Tensor t(shape);
  if (static_cast<std::int64_t>(values.size()) != t.size()) {
    throw ConfigError("value count does not match shape " + shape_string(shape));
  }
  t.d_->values = std::move(values);
  return t;
}

Tensor Tensor::scalar(double v) { return from({1}, {v}); }

Tensor Tensor::zeros_like(const Tensor& other) { return Tensor(other.shape()); }

double Tensor::item() const {
  if (size() != 1) throw ConfigError("item() on tensor of shape " + shape_string(shape()));
  return d_->values[0];
}

void Tensor::set_requires_grad(bool v) { d_->requires_grad = v; }

double* Tensor::grad() {
  if (d_->grad.empty()) d_->grad.assign(d_->values.size(), 0.0);
  return d_->grad.data();
}

void Tensor::zero_grad() {
  if (!d_->grad.empty()) d_->grad.assign(d_->values.size(), 0.0);
}

Tensor Tensor::clone() const {
  Tensor t;
  t.d_ = std::make_shared<detail::TensorData>();
  t.d_->shape = d_->shape;
  t.d_->values = d_->values;
  t.d_->requires_grad = d_->requires_grad;
  return t;
}

bool Tensor::all_finite() const {
  for (double v : d_->values) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

namespace {
thread_local Tape* g_current_tape = nullptr;
}

Tape::Tape() : prev_(g_current_tape) { g_current_tape = this; }

Tape::~Tape() { g_current_tape = prev_; }

Tape* Tape::current() { return g_current_tape; }

void Tape::record(std::function<void()> step) { steps_.push_back(std::move(step)); }

void backward(const Tensor& loss) {
  Tape* tape = Tape::current();
  if (tape == nullptr) throw ConfigError("backward() called with no active tape");
  if (tape->consumed_) throw ConfigError("backward() called on a consumed tape");
  if (loss.size() != 1) {
    throw ConfigError("backward() requires a scalar loss, got " + shape_string(loss.shape()));
  }
  tape->consumed_ = true;
  auto impl = loss.impl();
  if (impl->grad.empty()) impl->grad.assign(1, 0.0);
  impl->grad[0] += 1.0;
  for (auto it = tape->steps_.rbegin(); it != tape->steps_.rend(); ++it) (*it)();
}

}  // namespace iternet
