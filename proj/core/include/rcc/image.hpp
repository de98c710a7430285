#pragma once

#include <cmath>
#include <compare>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "rcc/error.hpp"

namespace rcc {

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;

  friend auto operator<=>(const Rgb&, const Rgb&) = default;
};

/// Dense row-major raster. `Tag` keeps rasters with the same pixel type but
/// different meaning (gray levels vs. mask bits) from mixing.
template <typename Pixel, typename Tag = void>
class Raster {
 public:
  using pixel_type = Pixel;

  Raster(int width, int height, Pixel fill = Pixel{}) : width_(width), height_(height) {
    if (width < 1 || height < 1) {
      throw InvalidParameter("raster dimensions must be at least 1x1, got " +
                             std::to_string(width) + "x" + std::to_string(height));
    }
    pixels_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
  }

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t size() const noexcept { return pixels_.size(); }

  bool contains(int x, int y) const noexcept {
    return x >= 0 && y >= 0 && x < width_ && y < height_;
  }

  Pixel& at(int x, int y) noexcept { return pixels_[index(x, y)]; }
  const Pixel& at(int x, int y) const noexcept { return pixels_[index(x, y)]; }

  /// Border-replicating read.
  const Pixel& clamped(int x, int y) const noexcept {
    x = x < 0 ? 0 : (x >= width_ ? width_ - 1 : x);
    y = y < 0 ? 0 : (y >= height_ ? height_ - 1 : y);
    return at(x, y);
  }

  std::span<Pixel> pixels() noexcept { return pixels_; }
  std::span<const Pixel> pixels() const noexcept { return pixels_; }

  std::span<const Pixel> row(int y) const noexcept {
    return std::span<const Pixel>(pixels_).subspan(static_cast<std::size_t>(y) * width_, width_);
  }

  friend bool operator==(const Raster&, const Raster&) = default;

 private:
  std::size_t index(int x, int y) const noexcept {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(x);
  }

  int width_;
  int height_;
  std::vector<Pixel> pixels_;
};

struct GrayTag;

using Image = Raster<Rgb>;
using GrayImage = Raster<std::uint8_t, GrayTag>;

struct HsvPixel {
  double h = 0.0;  // degrees, [0, 360)
  double s = 0.0;  // [0, 1]
  double v = 0.0;  // [0, 1]
};

/// Round half away from zero, then clamp to [0, 255]. Every real-to-channel
/// conversion in the library goes through here.
inline std::uint8_t to_channel(double value) noexcept {
  if (!(value > 0.0)) return 0;  // also maps NaN to 0
  const double r = std::round(value);
  return r >= 255.0 ? 255 : static_cast<std::uint8_t>(r);
}

using Bytes = std::vector<std::uint8_t>;

/// Parses a binary P6 stream with maxval 255. Header comments are accepted.
Image read_ppm(std::span<const std::uint8_t> bytes);

/// Canonical P6: "P6\n{w} {h}\n255\n" followed by the row-major payload.
Bytes write_ppm(const Image& img);

Image read_ppm_file(const std::filesystem::path& path);
void write_ppm_file(const std::filesystem::path& path, const Image& img);

/// BT.601 luma.
GrayImage rgb_to_gray(const Image& img);

/// Hexcone conversion; channels are real values in [0, 255].
HsvPixel rgb_to_hsv(double r, double g, double b) noexcept;
inline HsvPixel rgb_to_hsv(Rgb px) noexcept { return rgb_to_hsv(px.r, px.g, px.b); }

/// HSV of the image's mean pixel (channel means kept as reals).
HsvPixel mean_hsv(const Image& img) noexcept;

}  // namespace rcc
