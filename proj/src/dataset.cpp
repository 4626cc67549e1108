#include "iternet/dataset.hpp"

#include <cstring>
#include <fstream>
#include <sstream>

#include "iternet/binio.hpp"
#include "iternet/errors.hpp"

namespace iternet {
namespace binio {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  if (!in.good() && !in.eof()) throw DataError("error reading " + path);
  return buf.str();
}

void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out.good()) throw DataError("error writing " + path);
}

std::string hex64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i) {
    s[static_cast<std::size_t>(i)] = digits[v & 0xf];
    v >>= 4;
  }
  return s;
}

}  // namespace binio

namespace data {

namespace {
constexpr char kMagic[9] = "ITNETDS1";
constexpr std::uint32_t kVersion = 1;
}  // namespace

std::int64_t Dataset::input_stride() const { return numel(input_shape); }
std::int64_t Dataset::target_stride() const { return numel(target_shape); }

std::int64_t Dataset::size() const {
  return input_stride() == 0 ? 0 : static_cast<std::int64_t>(inputs.size()) / input_stride();
}

Tensor Dataset::input(std::int64_t i) const {
  const std::int64_t stride = input_stride();
  Tensor t(input_shape);
  double* d = t.data();
  const float* src = inputs.data() + i * stride;
  for (std::int64_t j = 0; j < stride; ++j) d[j] = static_cast<double>(src[j]);
  return t;
}

std::span<const std::uint8_t> Dataset::target(std::int64_t i) const {
  const std::int64_t stride = target_stride();
  return {targets.data() + i * stride, static_cast<std::size_t>(stride)};
}

void Dataset::append(const Tensor& in, std::span<const std::uint8_t> tgt) {
  if (in.shape() != input_shape) {
    throw DataError("append: input shape " + shape_string(in.shape()) + " does not match dataset " +
                    shape_string(input_shape));
  }
  if (static_cast<std::int64_t>(tgt.size()) != target_stride()) {
    throw DataError("append: target length mismatch");
  }
  const double* d = in.data();
  for (std::int64_t j = 0; j < in.size(); ++j) inputs.push_back(static_cast<float>(d[j]));
  targets.insert(targets.end(), tgt.begin(), tgt.end());
}

std::string Dataset::serialize() const {
  std::string out;
  out.reserve(64 + inputs.size() * 4 + targets.size());
  out.append(kMagic, 8);
  binio::put_u32(out, kVersion);
  binio::put_u32(out, static_cast<std::uint32_t>(task));
  binio::put_u64(out, static_cast<std::uint64_t>(size()));
  binio::put_u32(out, static_cast<std::uint32_t>(input_shape.size()));
  for (int d : input_shape) binio::put_u32(out, static_cast<std::uint32_t>(d));
  binio::put_u32(out, static_cast<std::uint32_t>(target_shape.size()));
  for (int d : target_shape) binio::put_u32(out, static_cast<std::uint32_t>(d));
  for (float v : inputs) binio::put_f32(out, v);
  out.append(reinterpret_cast<const char*>(targets.data()), targets.size());
  return out;
}

Dataset Dataset::deserialize(std::span<const char> bytes) {
  binio::Cursor c{bytes};
  if (!c.ok(24) || std::memcmp(bytes.data(), kMagic, 8) != 0) {
    throw DataError("not a dataset container (bad magic)");
  }
  c.pos = 8;
  const std::uint32_t version = c.u32();
  if (version != kVersion) throw DataError("unsupported dataset version " + std::to_string(version));
  Dataset ds;
  const std::uint32_t task_tag = c.u32();
  if (task_tag > 2) throw DataError("bad task tag in dataset header");
  ds.task = static_cast<nets::Task>(task_tag);
  const std::uint64_t count = c.u64();
  const std::uint32_t in_rank = c.u32();
  if (in_rank > 8) throw DataError("bad input rank in dataset header");
  for (std::uint32_t i = 0; i < in_rank; ++i) ds.input_shape.push_back(static_cast<int>(c.u32()));
  const std::uint32_t tgt_rank = c.u32();
  if (tgt_rank > 8) throw DataError("bad target rank in dataset header");
  for (std::uint32_t i = 0; i < tgt_rank; ++i) ds.target_shape.push_back(static_cast<int>(c.u32()));

  const std::uint64_t n_in = count * static_cast<std::uint64_t>(numel(ds.input_shape));
  const std::uint64_t n_tgt = count * static_cast<std::uint64_t>(numel(ds.target_shape));
  if (!c.ok(n_in * 4 + n_tgt)) throw DataError("dataset container truncated");
  ds.inputs.resize(n_in);
  for (std::uint64_t i = 0; i < n_in; ++i) ds.inputs[i] = c.f32();
  ds.targets.resize(n_tgt);
  std::memcpy(ds.targets.data(), bytes.data() + c.pos, n_tgt);
  c.pos += n_tgt;
  if (c.pos != bytes.size()) throw DataError("dataset container has trailing bytes");
  return ds;
}

void Dataset::save(const std::string& path) const {
  const std::string bytes = serialize();
  binio::write_file(path, bytes);
  nlohmann::json manifest;
  manifest["format"] = "iternet-dataset";
  manifest["version"] = kVersion;
  manifest["task"] = nets::to_string(task);
  manifest["count"] = size();
  manifest["input_shape"] = input_shape;
  manifest["target_shape"] = target_shape;
  manifest["params"] = params;
  manifest["content_hash"] = binio::hex64(binio::fnv1a(bytes));
  binio::write_file(path + ".manifest.json", manifest.dump(2) + "\n");
}

Dataset Dataset::load(const std::string& path) {
  const std::string bytes = binio::read_file(path);
  Dataset ds = deserialize(std::span<const char>(bytes.data(), bytes.size()));
  std::ifstream manifest_in(path + ".manifest.json");
  if (manifest_in) {
    try {
      nlohmann::json manifest = nlohmann::json::parse(manifest_in);
      if (manifest.contains("params")) ds.params = manifest["params"];
    } catch (const nlohmann::json::exception&) {
      // manifest is advisory; a bad sidecar does not invalidate the container
    }
  }
  return ds;
}

std::uint64_t Dataset::content_hash() const { return binio::fnv1a(serialize()); }

}  // namespace data
}  // namespace iternet
