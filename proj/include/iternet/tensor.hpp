#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

namespace iternet {

namespace detail {

struct TensorData {
  std::vector<int> shape;
  std::vector<double> values;
  std::vector<double> grad;   // allocated lazily, same length as values
  bool requires_grad = false;
  bool tracked = false;       // reachable from a recorded op in the live graph
};

}  // namespace detail

// Dense n-dimensional array of 64-bit floats, row-major. Copies are shallow
// handles to shared storage; clone() deep-copies.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<int> shape);             // zero initialized
  static Tensor from(std::vector<int> shape, std::vector<double> values);
  static Tensor scalar(double v);
  static Tensor zeros_like(const Tensor& other);

  bool defined() const { return static_cast<bool>(d_); }
  const std::vector<int>& shape() const { return d_->shape; }
  std::int64_t size() const { return static_cast<std::int64_t>(d_->values.size()); }

  double* data() { return d_->values.data(); }
  const double* data() const { return d_->values.data(); }
  double item() const;  // value of a 1-element tensor

  double& operator[](std::int64_t i) { return d_->values[static_cast<std::size_t>(i)]; }
  double operator[](std::int64_t i) const { return d_->values[static_cast<std::size_t>(i)]; }

  void set_requires_grad(bool v);
  bool requires_grad() const { return d_->requires_grad; }
  bool tracked() const { return d_->tracked; }

  // Gradient buffer, allocated (zeroed) on first access.
  double* grad();
  const std::vector<double>& grad_vector() const { return d_->grad; }
  bool has_grad() const { return !d_->grad.empty(); }
  void zero_grad();

  Tensor clone() const;  // deep copy of values and requires_grad (not grad)

  bool same_shape(const Tensor& other) const { return d_->shape == other.d_->shape; }
  bool all_finite() const;

  std::shared_ptr<detail::TensorData> impl() const { return d_; }

 private:
  std::shared_ptr<detail::TensorData> d_;
};

std::string shape_string(const std::vector<int>& shape);
std::int64_t numel(const std::vector<int>& shape);

// Records the backward step of every differentiable op executed while it is
// alive on the constructing thread. Replaying the steps in reverse order
// accumulates gradients into every tracked tensor; a tape can be consumed by
// backward() at most once.
class Tape {
 public:
  Tape();
  ~Tape();
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  static Tape* current();  // nullptr when nothing is recording on this thread

  void record(std::function<void()> step);
  std::size_t recorded_ops() const { return steps_.size(); }
  bool consumed() const { return consumed_; }

  friend void backward(const Tensor& loss);

 private:
  std::vector<std::function<void()>> steps_;
  bool consumed_ = false;
  Tape* prev_ = nullptr;
};

// Seeds loss.grad with 1 and replays the current tape in reverse, summing
// contributions into the grad buffer of every tracked tensor. Multiple uses
// of one tensor accumulate additively, which is what gives a weight-shared
// kernel the sum of its per-application gradients.
void backward(const Tensor& loss);

}  // namespace iternet
