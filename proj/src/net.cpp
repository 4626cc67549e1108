#include "iternet/net.hpp"

#include <cmath>
#include <cstring>

#include "iternet/errors.hpp"
#include "iternet/ops.hpp"
#include "iternet/rng.hpp"

namespace iternet::nets {

const char* to_string(Task task) {
  switch (task) {
    case Task::prefix: return "prefix";
    case Task::maze: return "maze";
    case Task::chess: return "chess";
  }
  return "?";
}

const char* to_string(Variant variant) {
  return variant == Variant::recurrent ? "recurrent" : "feedforward";
}

Task task_from_string(const std::string& name) {
  if (name == "prefix") return Task::prefix;
  if (name == "maze") return Task::maze;
  if (name == "chess") return Task::chess;
  throw ConfigError("unknown task '" + name + "'");
}

Variant variant_from_string(const std::string& name) {
  if (name == "recurrent") return Variant::recurrent;
  if (name == "feedforward") return Variant::feedforward;
  throw ConfigError("unknown variant '" + name + "'");
}

NetSpec NetSpec::defaults(Task task, Variant variant, int width, int iterations, int dilation) {
  NetSpec spec;
  spec.task = task;
  spec.variant = variant;
  spec.dilation = dilation;
  switch (task) {
    case Task::prefix:
      spec.input_channels = 1;
      spec.width = 120;
      spec.head_channels = {60, 30, 2};
      break;
    case Task::maze:
      spec.input_channels = 3;
      spec.width = 128;
      spec.head_channels = {32, 8, 2};
      break;
    case Task::chess:
      spec.input_channels = 12;
      spec.width = 512;
      spec.head_channels = {32, 8, 2};
      break;
  }
  if (width > 0) spec.width = width;
  spec.train_iterations = iterations > 0 ? iterations : 1;
  return spec;
}

void NetSpec::validate() const {
  if (width <= 0) throw ConfigError("net width must be positive");
  if (train_iterations <= 0) throw ConfigError("net iterations must be positive");
  if (dilation <= 0) throw ConfigError("net dilation must be positive");
  if (input_channels <= 0) throw ConfigError("net input channels must be positive");
  if (init_gain <= 0.0) throw ConfigError("net init gain must be positive");
  if (head_channels.size() != 3 || head_channels.back() != 2) {
    throw ConfigError("head must be three conv layers ending in 2 channels");
  }
  for (int c : head_channels) {
    if (c <= 0) throw ConfigError("head channel counts must be positive");
  }
}

int receptive_field_radius(const NetSpec& spec, int m) {
  // every 3-wide conv extends the one-sided window by `dilation`
  return (4 * m + 4) * spec.dilation;
}

namespace {

Tensor init_kernel(std::vector<int> shape, double gain, Rng& rng) {
  // Kaiming-style fan-in scaling; the gain sets how contractive the
  // recurrent map starts out
  std::int64_t fan_in = 1;
  for (std::size_t i = 1; i < shape.size(); ++i) fan_in *= shape[i];
  const double stddev = std::sqrt(gain / static_cast<double>(fan_in));
  Tensor t(std::move(shape));
  double* d = t.data();
  const std::int64_t n = t.size();
  for (std::int64_t i = 0; i < n; ++i) d[i] = stddev * rng.normal();
  t.set_requires_grad(true);
  return t;
}

std::vector<int> kernel_shape(Task task, int c_out, int c_in) {
  if (task == Task::prefix) return {c_out, c_in, 3};
  return {c_out, c_in, 3, 3};
}

}  // namespace

Net Net::build(const NetSpec& spec, std::uint64_t seed) {
  spec.validate();
  Net net;
  net.spec_ = spec;
  Rng rng(seed);

  net.encoder_ = init_kernel(kernel_shape(spec.task, spec.width, spec.input_channels), spec.init_gain, rng);

  const int n_blocks = spec.variant == Variant::recurrent ? 1 : spec.train_iterations;
  net.blocks_.resize(static_cast<std::size_t>(n_blocks));
  for (auto& block : net.blocks_) {
    for (auto& kernel : block) {
      kernel = init_kernel(kernel_shape(spec.task, spec.width, spec.width), spec.init_gain, rng);
    }
  }

  int c_in = spec.width;
  for (int i = 0; i < 3; ++i) {
    net.head_[static_cast<std::size_t>(i)] = init_kernel(kernel_shape(spec.task, spec.head_channels[static_cast<std::size_t>(i)], c_in), spec.init_gain, rng);
    c_in = spec.head_channels[static_cast<std::size_t>(i)];
  }
  return net;
}

Tensor Net::apply_conv(const Tensor& x, const Tensor& kernel) const {
  const int pad = spec_.dilation;  // 3-wide kernels keep spatial extent
  if (spec_.task == Task::prefix) return conv1d(x, kernel, pad, spec_.dilation);
  return conv2d(x, kernel, pad, spec_.dilation);
}

Tensor Net::apply_block(const Tensor& state, const std::array<Tensor, 4>& block) const {
  // two standard residual units: conv - relu - conv, skip, relu
  Tensor t = relu(apply_conv(state, block[0]));
  t = apply_conv(t, block[1]);
  Tensor s = relu(add(state, t));
  t = relu(apply_conv(s, block[2]));
  t = apply_conv(t, block[3]);
  return relu(add(s, t));
}

Tensor Net::apply_head(const Tensor& state) const {
  Tensor h = relu(apply_conv(state, head_[0]));
  h = relu(apply_conv(h, head_[1]));
  return apply_conv(h, head_[2]);  // logits stay unclamped
}

Tensor Net::forward(const Tensor& input) const {
  if (!input.defined() || input.shape().empty() || input.shape()[0] != spec_.input_channels) {
    throw ConfigError(std::string("forward: input does not match ") + to_string(spec_.task) + " geometry" +
                      (input.defined() ? " (got " + shape_string(input.shape()) + ")" : ""));
  }
  Tensor state = relu(apply_conv(input, encoder_));
  for (int i = 0; i < spec_.train_iterations; ++i) {
    const auto& block = spec_.variant == Variant::recurrent ? blocks_[0] : blocks_[static_cast<std::size_t>(i)];
    state = apply_block(state, block);
  }
  return apply_head(state);
}

IterationTrace Net::forward_iterations(const Tensor& input, int m) const {
  if (m < 1) throw ConfigError("forward_iterations: m must be at least 1");
  if (spec_.variant == Variant::feedforward && m != block_count()) {
    throw ConfigError("forward_iterations: feedforward net has exactly " + std::to_string(block_count()) +
                      " blocks, cannot run " + std::to_string(m) + " iterations");
  }
  if (!input.defined() || input.shape().empty() || input.shape()[0] != spec_.input_channels) {
    throw ConfigError(std::string("forward_iterations: input does not match ") + to_string(spec_.task) +
                      " geometry");
  }
  IterationTrace trace;
  trace.logits.reserve(static_cast<std::size_t>(m));
  Tensor state = relu(apply_conv(input, encoder_));
  for (int i = 0; i < m; ++i) {
    const auto& block = spec_.variant == Variant::recurrent ? blocks_[0] : blocks_[static_cast<std::size_t>(i)];
    state = apply_block(state, block);
    trace.logits.push_back(apply_head(state));
  }
  return trace;
}

std::vector<Tensor> Net::parameters() const {
  std::vector<Tensor> params;
  params.push_back(encoder_);
  for (const auto& block : blocks_) {
    for (const auto& kernel : block) params.push_back(kernel);
  }
  for (const auto& kernel : head_) params.push_back(kernel);
  return params;
}

std::int64_t Net::param_count() const {
  std::int64_t n = 0;
  for (const Tensor& p : parameters()) n += p.size();
  return n;
}

Net Net::clone() const {
  Net net;
  net.spec_ = spec_;
  net.encoder_ = encoder_.clone();
  net.blocks_.resize(blocks_.size());
  for (std::size_t b = 0; b < blocks_.size(); ++b) {
    for (std::size_t i = 0; i < 4; ++i) net.blocks_[b][i] = blocks_[b][i].clone();
  }
  for (std::size_t i = 0; i < 3; ++i) net.head_[i] = head_[i].clone();
  return net;
}

void Net::copy_values_from(const Net& other) {
  std::vector<Tensor> dst = parameters();
  std::vector<Tensor> src = other.parameters();
  if (dst.size() != src.size()) throw ConfigError("copy_values_from: parameter layout mismatch");
  for (std::size_t i = 0; i < dst.size(); ++i) {
    if (!dst[i].same_shape(src[i])) throw ConfigError("copy_values_from: parameter shape mismatch");
    std::memcpy(dst[i].data(), src[i].data(), static_cast<std::size_t>(src[i].size()) * sizeof(double));
  }
}

}  // namespace iternet::nets
