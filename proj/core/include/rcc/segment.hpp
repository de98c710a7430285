#pragma once

// Object localization: blur, binarize (adaptive threshold or Sobel edges),
// trace outer contours, keep the largest, and box it.

#include <compare>
#include <cstdint>
#include <span>
#include <vector>

#include "rcc/image.hpp"

namespace rcc {

struct MaskTag;

/// Foreground = 1, background = 0.
using BinaryMask = Raster<std::uint8_t, MaskTag>;

struct Point {
  int col = 0;
  int row = 0;

  friend auto operator<=>(const Point&, const Point&) = default;
};

/// Closed outer boundary of one 8-connected component; consecutive points
/// (and last/first) are 8-neighbors. A boundary may revisit a pixel where
/// the component is one pixel wide.
struct Contour {
  std::vector<Point> points;
};

struct BoundRect {
  int x = 0;
  int y = 0;
  int w = 1;
  int h = 1;

  friend bool operator==(const BoundRect&, const BoundRect&) = default;
};

enum class SegmenterMode { kAdaptive, kSobel };

/// Which side of the local mean counts as foreground in adaptive mode.
enum class Polarity { kDarkObject, kLightObject };

struct SegmentConfig {
  SegmenterMode mode = SegmenterMode::kAdaptive;
  double sigma = 1.4;
  int window = 11;
  double offset = 2.0;
  int edge_threshold = 80;
  Polarity polarity = Polarity::kDarkObject;
};

/// Normalized sampled Gaussian of length 2*ceil(3*sigma)+1.
std::vector<double> gaussian_kernel(double sigma);

/// Separable blur (horizontal, then vertical) with replicated borders. The
/// intermediate pass stays in floating point; only the result is rounded.
GrayImage gaussian_blur(const GrayImage& img, double sigma);

/// Pixel p is foreground iff p < mean(window x window) - c (dark polarity)
/// or p > mean + c (light polarity). Borders replicate.
BinaryMask adaptive_threshold(const GrayImage& img, int window, double c,
                              Polarity polarity = Polarity::kDarkObject);

/// Gradient magnitude from the 3x3 Sobel pair, rounded and clamped to 255.
GrayImage sobel_magnitude(const GrayImage& img);

/// Sobel edges at or above `threshold` kept only where the magnitude is a
/// local maximum across the edge (gradient direction binned to 45 degrees).
/// A blurred step edge otherwise stays above threshold for several pixels on
/// either side, which pushes the traced outline outward.
BinaryMask thin_edges(const GrayImage& img, int threshold);

/// Foreground where value >= threshold.
BinaryMask threshold_mask(const GrayImage& img, int threshold);

/// One pass of 3x3 binary dilation (out-of-image neighbors count as background).
BinaryMask dilate3x3(const BinaryMask& mask);

/// Moore-neighbor tracing with Jacob's stopping criterion. One contour per
/// 8-connected component, in row-major order of each component's first pixel;
/// every contour starts at that pixel.
std::vector<Contour> trace_contours(const BinaryMask& mask);

/// Contour whose component holds the most foreground pixels. Ties go to the
/// component whose first scan-order pixel comes first.
Contour largest_contour(std::span<const Contour> contours, const BinaryMask& mask);

/// Axis-aligned inclusive extent of the contour points.
BoundRect minimum_bounding_rect(const Contour& contour);

/// Builds the foreground mask used by `detect_bounding_box`.
BinaryMask segment_mask(const Image& img, const SegmentConfig& cfg);

BoundRect detect_bounding_box(const Image& img, const SegmentConfig& cfg = {});

}  // namespace rcc
