#pragma once

// Fixed-range HSV color classifier: each class owns a hue interval plus
// saturation and value floors, calibrated from training patches.

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rcc/image.hpp"

namespace rcc {

struct HsvRange {
  int class_index = 0;
  double h_min = 0.0;  // [0, 360)
  double h_max = 0.0;  // >= h_min; may exceed 360 when the interval wraps
  double s_min = 0.0;
  double v_min = 0.0;

  bool contains(const HsvPixel& px) const;
};

struct LabeledPatch {
  const Image* patch;
  int label;
};

/// Linear-interpolated percentile (q in [0, 1]) of an unsorted sample.
double percentile(std::vector<double> values, double q);

/// [p5, p95] of circular hue samples: the circle is cut at the widest gap
/// between consecutive hues, then percentiles are taken on the unwrapped run.
std::pair<double, double> circular_hue_range(std::span<const double> hues, double lo_q = 0.05, double hi_q = 0.95);

/// One range per class 0..num_classes-1 from the HSV of each patch's mean pixel.
std::vector<HsvRange> calibrate_ranges(std::span<const LabeledPatch> samples, int num_classes = 6);

/// First class in ascending index whose range holds the patch's mean HSV.
std::optional<int> classify_hsv(const Image& patch, std::span<const HsvRange> ranges);

inline constexpr const char* kRangesHeader = "class_index,h_min,h_max,s_min,v_min";

std::string format_ranges(std::span<const HsvRange> ranges);
std::vector<HsvRange> parse_ranges(std::string_view csv);
void write_ranges_file(const std::filesystem::path& path, std::span<const HsvRange> ranges);
std::vector<HsvRange> read_ranges_file(const std::filesystem::path& path);

}  // namespace rcc
