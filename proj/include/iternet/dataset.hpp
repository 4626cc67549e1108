#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "iternet/net.hpp"
#include "iternet/tensor.hpp"

namespace iternet::data {

// Input/target pairs for one task, stored flat. Inputs are float32 in the
// container (converted to float64 tensors on access), targets are one {0,1}
// byte per output position. `params` carries the generation parameters and
// is persisted as a JSON manifest next to the container.
struct Dataset {
  nets::Task task = nets::Task::prefix;
  std::vector<int> input_shape;   // per-sample, e.g. {1,16}, {3,32,32}, {12,8,8}
  std::vector<int> target_shape;  // per-sample, e.g. {16}, {32,32}, {8,8}
  std::vector<float> inputs;
  std::vector<std::uint8_t> targets;
  nlohmann::json params;

  std::int64_t size() const;
  std::int64_t input_stride() const;
  std::int64_t target_stride() const;

  Tensor input(std::int64_t i) const;
  std::span<const std::uint8_t> target(std::int64_t i) const;
  void append(const Tensor& input, std::span<const std::uint8_t> target);

  // Container bytes: magic, version, task tag, sample count, shapes, then
  // float32 inputs and uint8 targets, all little-endian.
  std::string serialize() const;
  static Dataset deserialize(std::span<const char> bytes);

  // Writes <path> and a <path>.manifest.json sidecar.
  void save(const std::string& path) const;
  static Dataset load(const std::string& path);

  std::uint64_t content_hash() const;
};

}  // namespace iternet::data
