#include "iternet/prefix.hpp"

#include <unordered_set>

#include "iternet/errors.hpp"
#include "iternet/rng.hpp"

namespace iternet::data {

std::vector<std::uint8_t> prefix_target(std::span<const std::uint8_t> bits) {
  std::vector<std::uint8_t> out(bits.size());
  std::uint8_t parity = 0;
  for (std::size_t i = 0; i < bits.size(); ++i) {
    parity ^= bits[i];
    out[i] = parity;
  }
  return out;
}

Dataset gen_prefix_dataset(int n_bits, std::int64_t count, std::uint64_t seed) {
  if (n_bits < 1 || n_bits > 64) throw DataError("prefix: bit length must be in [1, 64]");
  if (count < 1) throw DataError("prefix: count must be positive");
  if (n_bits < 64) {
    const std::uint64_t space = 1ull << n_bits;
    if (static_cast<std::uint64_t>(count) > space) {
      throw DataError("prefix: cannot draw " + std::to_string(count) + " distinct strings of length " +
                      std::to_string(n_bits) + " (only " + std::to_string(space) + " exist)");
    }
  }

  Dataset ds;
  ds.task = nets::Task::prefix;
  ds.input_shape = {1, n_bits};
  ds.target_shape = {n_bits};
  ds.inputs.reserve(static_cast<std::size_t>(count) * static_cast<std::size_t>(n_bits));
  ds.targets.reserve(ds.inputs.capacity());
  ds.params = {{"task", "prefix"}, {"n_bits", n_bits}, {"count", count}, {"seed", seed}};

  Rng rng(seed);
  std::unordered_set<std::uint64_t> seen;
  seen.reserve(static_cast<std::size_t>(count) * 2);
  std::vector<std::uint8_t> bits(static_cast<std::size_t>(n_bits));
  while (static_cast<std::int64_t>(seen.size()) < count) {
    const std::uint64_t value = n_bits == 64 ? rng.next_u64() : rng.below(1ull << n_bits);
    if (!seen.insert(value).second) continue;
    for (int i = 0; i < n_bits; ++i) {
      // most significant digit first, as in an n-digit binary expansion
      bits[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>((value >> (n_bits - 1 - i)) & 1);
    }
    const std::vector<std::uint8_t> target = prefix_target(bits);
    for (std::uint8_t b : bits) ds.inputs.push_back(static_cast<float>(b));
    ds.targets.insert(ds.targets.end(), target.begin(), target.end());
  }
  return ds;
}

}  // namespace iternet::data
