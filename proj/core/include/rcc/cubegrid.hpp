#pragma once

#include <array>
#include <span>
#include <vector>

#include "rcc/image.hpp"
#include "rcc/segment.hpp"

namespace rcc {

inline constexpr int kGridCells = 9;

struct CubeSpec {
  int size = 32;
};

/// Nine size x size cubes cut from the (possibly upscaled) bounding-box crop,
/// ordered i-major (column index i outer, row index j inner).
struct CubeGrid {
  std::vector<Image> cubes;
  std::vector<Point> centers;  // in working-crop coordinates
  int work_width = 0;
  int work_height = 0;
};

Image crop(const Image& img, const BoundRect& rect);

/// Nearest neighbor: source index = floor((dst + 0.5) * src / dst).
Image resize_nearest(const Image& img, int new_width, int new_height);

/// Crop followed by the upscale rule: if either side is below 3*size, scale
/// so the deficient side reaches 3*size, then clamp both sides up to 3*size.
Image working_crop(const Image& img, const BoundRect& rect, const CubeSpec& spec);

/// Cube centers sit at the midpoints of a 3x3 partition of the working crop:
/// x1 = round((2i+1) * W / 6), y1 = round((2j+1) * H / 6).
CubeGrid extract_color_cubes(const Image& img, const BoundRect& rect, const CubeSpec& spec = {});

struct Vote {
  int label = 0;
  double confidence = 0.0;
};

/// Majority vote over the nine per-cube labels. Ties among the most frequent
/// labels go to the greatest mean probability (averaged over the cubes that
/// voted for the label), then to the lower class index.
Vote aggregate_votes(std::span<const int> labels, std::span<const std::vector<double>> confidences);

}  // namespace rcc
