#include "iternet/heatmap.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "iternet/binio.hpp"
#include "iternet/errors.hpp"

namespace iternet::eval {

namespace {

std::uint8_t quantize(double v) {
  const double scaled = std::round(255.0 * std::clamp(v, 0.0, 1.0));
  return static_cast<std::uint8_t>(scaled);
}

void write_pnm(const std::string& path, const char* tag, int width, int height, int channels,
               std::span<const std::uint8_t> pixels) {
  if (static_cast<std::int64_t>(pixels.size()) != static_cast<std::int64_t>(width) * height * channels) {
    throw ConfigError("raster buffer does not match declared dimensions");
  }
  std::string bytes;
  bytes += tag;
  bytes += "\n" + std::to_string(width) + " " + std::to_string(height) + "\n255\n";
  bytes.append(reinterpret_cast<const char*>(pixels.data()), pixels.size());
  binio::write_file(path, bytes);
}

// class-1 probability per position of a [2 x P...] logit tensor
std::vector<double> class_one_probs(const Tensor& logits) {
  const std::int64_t positions = logits.size() / 2;
  const double* z = logits.data();
  std::vector<double> probs(static_cast<std::size_t>(positions));
  for (std::int64_t p = 0; p < positions; ++p) {
    const double d = z[p] - z[positions + p];
    probs[static_cast<std::size_t>(p)] = d > 700.0 ? 0.0 : d < -700.0 ? 1.0 : 1.0 / (1.0 + std::exp(d));
  }
  return probs;
}

std::string iter_name(int i) {
  std::string n = std::to_string(i + 1);
  while (n.size() < 3) n.insert(n.begin(), '0');
  return "iter_" + n + ".pgm";
}

}  // namespace

void write_pgm(const std::string& path, int width, int height, std::span<const std::uint8_t> gray) {
  write_pnm(path, "P5", width, height, 1, gray);
}

void write_ppm(const std::string& path, int width, int height, std::span<const std::uint8_t> rgb) {
  write_pnm(path, "P6", width, height, 3, rgb);
}

Image read_pnm(const std::string& path) {
  const std::string bytes = binio::read_file(path);
  std::istringstream in(bytes);
  std::string tag;
  int width = 0, height = 0, maxval = 0;
  in >> tag >> width >> height >> maxval;
  if ((tag != "P5" && tag != "P6") || width <= 0 || height <= 0 || maxval != 255) {
    throw DataError(path + ": not an 8-bit binary PGM/PPM");
  }
  in.get();  // single whitespace after maxval
  Image img;
  img.width = width;
  img.height = height;
  img.channels = tag == "P5" ? 1 : 3;
  const std::size_t n = static_cast<std::size_t>(width) * static_cast<std::size_t>(height) *
                        static_cast<std::size_t>(img.channels);
  const std::size_t offset = static_cast<std::size_t>(in.tellg());
  if (bytes.size() - offset < n) throw DataError(path + ": truncated raster");
  img.pixels.assign(bytes.begin() + static_cast<std::ptrdiff_t>(offset),
                    bytes.begin() + static_cast<std::ptrdiff_t>(offset + n));
  return img;
}

std::vector<std::string> emit_heatmaps(const nets::IterationTrace& trace, const Tensor& input,
                                       std::span<const std::uint8_t> target, nets::Task task,
                                       const std::string& out_dir) {
  if (trace.logits.empty()) throw ConfigError("emit_heatmaps: empty trace");
  std::filesystem::create_directories(out_dir);
  const int m = static_cast<int>(trace.logits.size());
  std::vector<std::string> written;

  if (task == nets::Task::prefix) {
    // Figure layout: input column, one column per iteration, target column
    const int n_bits = input.shape()[1];
    const int width = m + 2;
    std::vector<std::uint8_t> panel(static_cast<std::size_t>(n_bits) * width, 0);
    for (int row = 0; row < n_bits; ++row) {
      panel[static_cast<std::size_t>(row * width)] = quantize(input[row]);
      panel[static_cast<std::size_t>(row * width + width - 1)] = quantize(target[static_cast<std::size_t>(row)]);
    }
    for (int it = 0; it < m; ++it) {
      const std::vector<double> probs = class_one_probs(trace.logits[static_cast<std::size_t>(it)]);
      for (int row = 0; row < n_bits; ++row) {
        panel[static_cast<std::size_t>(row * width + it + 1)] = quantize(probs[static_cast<std::size_t>(row)]);
      }
    }
    const std::string path = (std::filesystem::path(out_dir) / "trace.pgm").string();
    write_pgm(path, width, n_bits, panel);
    written.push_back(path);
    return written;
  }

  const int h = input.shape()[1];
  const int w = input.shape()[2];
  const std::int64_t plane = static_cast<std::int64_t>(h) * w;

  std::string input_path;
  if (task == nets::Task::maze) {
    std::vector<std::uint8_t> rgb(static_cast<std::size_t>(plane) * 3);
    for (std::int64_t p = 0; p < plane; ++p) {
      for (int ch = 0; ch < 3; ++ch) {
        rgb[static_cast<std::size_t>(p * 3 + ch)] = quantize(input[ch * plane + p]);
      }
    }
    input_path = (std::filesystem::path(out_dir) / "input.ppm").string();
    write_ppm(input_path, w, h, rgb);
  } else {
    // occupancy view: any piece renders white
    std::vector<std::uint8_t> gray(static_cast<std::size_t>(plane), 0);
    const int planes = input.shape()[0];
    for (std::int64_t p = 0; p < plane; ++p) {
      double v = 0.0;
      for (int ch = 0; ch < planes; ++ch) v = std::max(v, input[ch * plane + p]);
      gray[static_cast<std::size_t>(p)] = quantize(v);
    }
    input_path = (std::filesystem::path(out_dir) / "input.pgm").string();
    write_pgm(input_path, w, h, gray);
  }
  written.push_back(input_path);

  for (int it = 0; it < m; ++it) {
    const std::vector<double> probs = class_one_probs(trace.logits[static_cast<std::size_t>(it)]);
    std::vector<std::uint8_t> gray(static_cast<std::size_t>(plane));
    for (std::int64_t p = 0; p < plane; ++p) gray[static_cast<std::size_t>(p)] = quantize(probs[static_cast<std::size_t>(p)]);
    const std::string path = (std::filesystem::path(out_dir) / iter_name(it)).string();
    write_pgm(path, w, h, gray);
    written.push_back(path);
  }

  std::vector<std::uint8_t> gray(static_cast<std::size_t>(plane));
  for (std::int64_t p = 0; p < plane; ++p) {
    gray[static_cast<std::size_t>(p)] = target[static_cast<std::size_t>(p)] != 0 ? 255 : 0;
  }
  const std::string target_path = (std::filesystem::path(out_dir) / "target.pgm").string();
  write_pgm(target_path, w, h, gray);
  written.push_back(target_path);
  return written;
}

}  // namespace iternet::eval
