#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "iternet/dataset.hpp"

namespace iternet::data {

// Running sum modulo two: out[i] is the parity of bits[0..i].
std::vector<std::uint8_t> prefix_target(std::span<const std::uint8_t> bits);

// `count` distinct uniform bit strings of length n_bits (sampled without
// replacement), each paired with its parity target. Inputs are stored as raw
// {0,1} values; any normalization happens at training time.
Dataset gen_prefix_dataset(int n_bits, std::int64_t count, std::uint64_t seed);

}  // namespace iternet::data
