#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "iternet/net.hpp"
#include "iternet/tensor.hpp"

namespace iternet::eval {

// Binary PGM (P5) / PPM (P6), 8-bit, maxval 255. Header is exactly
// "P5\n<width> <height>\n255\n" followed by raw rows.
void write_pgm(const std::string& path, int width, int height, std::span<const std::uint8_t> gray);
void write_ppm(const std::string& path, int width, int height, std::span<const std::uint8_t> rgb);

struct Image {
  int width = 0;
  int height = 0;
  int channels = 0;  // 1 or 3
  std::vector<std::uint8_t> pixels;
};

Image read_pnm(const std::string& path);

// Per-iteration class-1 confidence rendered as 8-bit rasters, one panel per
// iteration plus an input panel and a target panel (m + 2 in total). Pixel
// values are round(255 * confidence).
//
// prefix: a single PGM whose columns are the panels, input leftmost and
// target rightmost, one row per bit position. maze/chess: one file per
// panel; the maze input panel is a color PPM.
//
// `input` is the raw dataset tensor (before any normalization).
// Returns the written paths.
std::vector<std::string> emit_heatmaps(const nets::IterationTrace& trace, const Tensor& input,
                                       std::span<const std::uint8_t> target, nets::Task task,
                                       const std::string& out_dir);

}  // namespace iternet::eval
