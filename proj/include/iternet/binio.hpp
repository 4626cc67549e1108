#pragma once

#include <cstdint>
#include <cstring>
#include <limits>
#include <span>
#include <string>

namespace iternet {

static_assert(std::numeric_limits<double>::is_iec559, "IEEE 754 floats required");

// Little-endian encoding into a growable byte buffer, and the matching
// cursor-based decoder. File formats are byte-identical across platforms.
namespace binio {

inline void put_u8(std::string& out, std::uint8_t v) { out.push_back(static_cast<char>(v)); }

inline void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline void put_f32(std::string& out, float v) {
  std::uint32_t bits;
  std::memcpy(&bits, &v, 4);
  put_u32(out, bits);
}

inline void put_f64(std::string& out, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, 8);
  put_u64(out, bits);
}

struct Cursor {
  std::span<const char> bytes;
  std::size_t pos = 0;

  bool ok(std::size_t n) const { return pos + n <= bytes.size(); }

  std::uint8_t u8() { return static_cast<std::uint8_t>(bytes[pos++]); }

  std::uint32_t u32() {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<std::uint8_t>(bytes[pos++])) << (8 * i);
    return v;
  }

  std::uint64_t u64() {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<std::uint8_t>(bytes[pos++])) << (8 * i);
    return v;
  }

  float f32() {
    std::uint32_t bits = u32();
    float v;
    std::memcpy(&v, &bits, 4);
    return v;
  }

  double f64() {
    std::uint64_t bits = u64();
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
  }
};

inline std::uint64_t fnv1a(std::span<const char> bytes, std::uint64_t seed = 0xcbf29ce484222325ull) {
  std::uint64_t h = seed;
  for (char c : bytes) {
    h ^= static_cast<std::uint8_t>(c);
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::uint64_t fnv1a(const std::string& s) { return fnv1a(std::span<const char>(s.data(), s.size())); }

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& bytes);
std::string hex64(std::uint64_t v);

}  // namespace binio
}  // namespace iternet
