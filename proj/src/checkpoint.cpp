#include "iternet/checkpoint.hpp"

#include <cstring>

#include "iternet/binio.hpp"
#include "iternet/errors.hpp"

namespace iternet::training {

namespace {
constexpr char kMagic[9] = "ITNETCK1";
constexpr std::uint32_t kVersion = 1;
}  // namespace

void save_checkpoint(const nets::Net& net, const ExperimentConfig& config, const RunLog& log,
                     const std::string& path) {
  std::string out;
  out.append(kMagic, 8);
  binio::put_u32(out, kVersion);

  const std::string config_text = config.to_text();
  binio::put_u64(out, binio::fnv1a(config_text));
  binio::put_u32(out, static_cast<std::uint32_t>(config_text.size()));
  out.append(config_text);

  const std::string log_csv = log.to_csv();
  binio::put_u32(out, static_cast<std::uint32_t>(log_csv.size()));
  out.append(log_csv);

  const std::vector<Tensor> params = net.parameters();
  binio::put_u32(out, static_cast<std::uint32_t>(params.size()));
  for (const Tensor& p : params) {
    binio::put_u32(out, static_cast<std::uint32_t>(p.shape().size()));
    for (int d : p.shape()) binio::put_u32(out, static_cast<std::uint32_t>(d));
    for (std::int64_t i = 0; i < p.size(); ++i) binio::put_f64(out, p[i]);
  }

  binio::put_u64(out, binio::fnv1a(out));
  binio::write_file(path, out);
}

Checkpoint load_checkpoint(const std::string& path, const ExperimentConfig* expected) {
  const std::string bytes = binio::read_file(path);
  if (bytes.size() < 8 + 4 + 8 + 4 + 4 + 4 + 8 || std::memcmp(bytes.data(), kMagic, 8) != 0) {
    throw DataError(path + ": not a checkpoint (bad magic)");
  }
  const std::uint64_t stored_sum = binio::Cursor{std::span<const char>(bytes).last(8)}.u64();
  const std::span<const char> body(bytes.data(), bytes.size() - 8);
  if (binio::fnv1a(body) != stored_sum) {
    throw DataError(path + ": checksum mismatch, file is corrupt or tampered");
  }

  binio::Cursor c{body, 8};
  const std::uint32_t version = c.u32();
  if (version != kVersion) throw DataError(path + ": unsupported checkpoint version " + std::to_string(version));

  const std::uint64_t config_hash = c.u64();
  const std::uint32_t config_len = c.u32();
  if (!c.ok(config_len)) throw DataError(path + ": truncated checkpoint");
  const std::string config_text(bytes.data() + c.pos, config_len);
  c.pos += config_len;
  if (binio::fnv1a(config_text) != config_hash) {
    throw DataError(path + ": config hash mismatch, file is corrupt or tampered");
  }

  Checkpoint ck;
  ck.config = ExperimentConfig::from_text(config_text);
  if (expected != nullptr && expected->hash() != ck.config.hash()) {
    throw ConfigError(path + ": checkpoint was trained under a different config");
  }

  const std::uint32_t log_len = c.u32();
  if (!c.ok(log_len)) throw DataError(path + ": truncated checkpoint");
  ck.run_log_csv.assign(bytes.data() + c.pos, log_len);
  c.pos += log_len;

  ck.net = nets::Net::build(ck.config.net_spec(), ck.config.seed);
  std::vector<Tensor> params = ck.net.parameters();
  const std::uint32_t n_params = c.u32();
  if (n_params != params.size()) throw DataError(path + ": parameter layout does not match config");
  for (Tensor& p : params) {
    const std::uint32_t rank = c.u32();
    if (rank != p.shape().size()) throw DataError(path + ": parameter rank mismatch");
    for (int d : p.shape()) {
      if (c.u32() != static_cast<std::uint32_t>(d)) throw DataError(path + ": parameter shape mismatch");
    }
    if (!c.ok(static_cast<std::size_t>(p.size()) * 8)) throw DataError(path + ": truncated checkpoint");
    for (std::int64_t i = 0; i < p.size(); ++i) p[i] = c.f64();
  }
  if (c.pos != body.size()) throw DataError(path + ": trailing bytes in checkpoint");
  return ck;
}

}  // namespace iternet::training
