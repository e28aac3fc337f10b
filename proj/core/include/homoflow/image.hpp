#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "homoflow/homography.hpp"

namespace homoflow {

// Row-major grayscale intensities in [0, 1].
struct GrayFrame {
  int width = 0;
  int height = 0;
  std::vector<float> pixels;

  GrayFrame() = default;
  GrayFrame(int w, int h, float fill = 0.0f);

  float at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
  float& at(int x, int y) { return pixels[static_cast<std::size_t>(y) * width + x]; }
  bool contains(double x, double y) const {
    return x >= 0.0 && y >= 0.0 && x <= width - 1.0 && y <= height - 1.0;
  }

  // Bilinear sample; `outside` is returned for points off the pixel grid.
  double sample(double x, double y, double outside = 0.0) const;

  FrameGeometry geometry() const { return {width, height}; }
  bool operator==(const GrayFrame&) const = default;
};

// Interleaved 8-bit RGB.
struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> data;

  RgbImage() = default;
  RgbImage(int w, int h) : width(w), height(h), data(static_cast<std::size_t>(w) * h * 3, 0) {}
  std::uint8_t* px(int x, int y) { return &data[(static_cast<std::size_t>(y) * width + x) * 3]; }
  const std::uint8_t* px(int x, int y) const {
    return &data[(static_cast<std::size_t>(y) * width + x) * 3];
  }
};

// Area-averaging resample to the requested size.
GrayFrame downsample_area(const GrayFrame& f, int width, int height);

// Resamples `src` through the inverse map: out(q) = src(inverse(q)).
GrayFrame warp_frame(const GrayFrame& src, const Homography& out_to_src, int width, int height,
                     double outside = 0.0);

// PNG (gray or RGB, RGB converted by Rec.601 luma) or binary PGM (P5).
// Throws InvalidInput on unreadable files.
GrayFrame read_frame(const std::filesystem::path& path);
void write_png(const std::filesystem::path& path, const GrayFrame& frame);
void write_png(const std::filesystem::path& path, const RgbImage& image);
void write_pgm(const std::filesystem::path& path, const GrayFrame& frame);

// Image files (.png, .pgm) in a directory, ordered by filename.
std::vector<std::filesystem::path> list_frame_files(const std::filesystem::path& dir);

std::uint8_t to_byte(double v);

}  // namespace homoflow
