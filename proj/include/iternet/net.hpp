#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "iternet/tensor.hpp"

namespace iternet::nets {

enum class Task { prefix, maze, chess };
enum class Variant { recurrent, feedforward };

const char* to_string(Task task);
const char* to_string(Variant variant);
Task task_from_string(const std::string& name);
Variant variant_from_string(const std::string& name);

// Architecture description. All layers are 3-wide convolutions without bias;
// a residual block is four of them with a skip connection every two layers.
struct NetSpec {
  Task task = Task::prefix;
  Variant variant = Variant::recurrent;
  int width = 0;                   // channels of encoder output and block layers
  int train_iterations = 0;        // block applications during training
  int dilation = 1;
  int input_channels = 0;
  std::vector<int> head_channels;  // three head layers; last entry is the 2-class output
  double init_gain = 2.0;          // kernel init stddev is sqrt(init_gain / fan_in)

  // Per-task defaults: prefix 1 -> 120 -> (60, 30, 2); maze 3 -> 128 -> (32, 8, 2);
  // chess 12 -> 512 -> (32, 8, 2). width/iterations/dilation override when nonzero.
  static NetSpec defaults(Task task, Variant variant, int width = 0, int iterations = 0, int dilation = 1);

  // Conv layers executed per forward pass: 1 encoder + 4 per iteration + 3 head.
  int effective_depth() const { return 4 * train_iterations + 4; }
  void validate() const;
};

// One-sided width of the input window that can influence a single output
// position after m block applications (3-wide kernels, stride 1).
int receptive_field_radius(const NetSpec& spec, int m);

// Per-iteration outputs of one forward pass. confidence is filled by the
// evaluation module, not here.
struct IterationTrace {
  std::vector<Tensor> logits;
  std::vector<double> confidence;
};

class Net {
 public:
  Net() = default;

  // Deterministic construction: same spec and seed give identical parameters.
  static Net build(const NetSpec& spec, std::uint64_t seed);

  // Training-time pass: encoder once, train_iterations block applications
  // (all through the one shared block for the recurrent variant), head once.
  Tensor forward(const Tensor& input) const;

  // Applies the block m times and reads the head after every application.
  // The head is replayed on each intermediate state without disturbing it.
  // The feedforward variant has a fixed layout, so it only accepts
  // m == block_count().
  IterationTrace forward_iterations(const Tensor& input, int m) const;

  // Learnable kernels in a stable order: encoder, blocks, head.
  std::vector<Tensor> parameters() const;
  std::int64_t param_count() const;

  int block_count() const { return static_cast<int>(blocks_.size()); }
  const NetSpec& spec() const { return spec_; }

  Net clone() const;                         // deep parameter copy
  void copy_values_from(const Net& other);   // overwrite parameter values in place

 private:
  Tensor apply_conv(const Tensor& x, const Tensor& kernel) const;
  Tensor apply_block(const Tensor& state, const std::array<Tensor, 4>& block) const;
  Tensor apply_head(const Tensor& state) const;

  NetSpec spec_;
  Tensor encoder_;
  std::vector<std::array<Tensor, 4>> blocks_;  // one entry when recurrent
  std::array<Tensor, 3> head_;
};

}  // namespace iternet::nets
