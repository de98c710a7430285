#include "rcc/baseline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace rcc {
namespace {

constexpr double kHueSlack = 1e-9;

}  // namespace

bool HsvRange::contains(const HsvPixel& px) const {
  if (px.s < s_min || px.v < v_min) return false;
  const double width = h_max - h_min;
  if (width >= 360.0) return true;
  double offset = px.h - h_min;
  if (offset < 0.0) offset += 360.0;
  return offset <= width + kHueSlack || offset >= 360.0 - kHueSlack;
}

double percentile(std::vector<double> values, double q) {
  if (values.empty()) throw CalibrationError("percentile of an empty sample");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

std::pair<double, double> circular_hue_range(std::span<const double> hues, double lo_q, double hi_q) {
  if (hues.empty()) throw CalibrationError("hue range of an empty sample");
  std::vector<double> sorted(hues.begin(), hues.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();

  // Gap i runs from sorted[i] to the next hue around the circle.
  std::size_t widest = n - 1;
  double widest_gap = sorted.front() + 360.0 - sorted.back();
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double gap = sorted[i + 1] - sorted[i];
    if (gap > widest_gap) {
      widest_gap = gap;
      widest = i;
    }
  }
  const std::size_t start = (widest + 1) % n;
  std::vector<double> unwrapped;
  unwrapped.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t idx = (start + k) % n;
    unwrapped.push_back(idx < start ? sorted[idx] + 360.0 : sorted[idx]);
  }
  const double lo = percentile(unwrapped, lo_q);
  const double hi = percentile(unwrapped, hi_q);
  const double h_min = std::fmod(lo, 360.0);
  return {h_min, h_min + (hi - lo)};
}

std::vector<HsvRange> calibrate_ranges(std::span<const LabeledPatch> samples, int num_classes) {
  std::vector<std::vector<HsvPixel>> per_class(static_cast<std::size_t>(num_classes));
  for (const auto& s : samples) {
    if (s.label < 0 || s.label >= num_classes) {
      throw CalibrationError("sample label out of range: " + std::to_string(s.label));
    }
    per_class[static_cast<std::size_t>(s.label)].push_back(mean_hsv(*s.patch));
  }

  std::vector<HsvRange> ranges;
  for (int c = 0; c < num_classes; ++c) {
    const auto& px = per_class[static_cast<std::size_t>(c)];
    if (px.empty()) throw CalibrationError("no calibration samples for class " + std::to_string(c));
    std::vector<double> h, s, v;
    for (const auto& p : px) {
      h.push_back(p.h);
      s.push_back(p.s);
      v.push_back(p.v);
    }
    const auto [h_min, h_max] = circular_hue_range(h);
    ranges.push_back({c, h_min, h_max, percentile(s, 0.05), percentile(v, 0.05)});
  }
  return ranges;
}

std::optional<int> classify_hsv(const Image& patch, std::span<const HsvRange> ranges) {
  const HsvPixel px = mean_hsv(patch);
  std::optional<int> best;
  for (const auto& r : ranges) {
    if (r.contains(px) && (!best || r.class_index < *best)) best = r.class_index;
  }
  return best;
}

std::string format_ranges(std::span<const HsvRange> ranges) {
  std::string out = std::string(kRangesHeader) + "\n";
  char buf[160];
  for (const auto& r : ranges) {
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g,%.17g\n", r.class_index, r.h_min, r.h_max, r.s_min, r.v_min);
    out += buf;
  }
  return out;
}

std::vector<HsvRange> parse_ranges(std::string_view csv) {
  std::istringstream in{std::string(csv)};
  std::string line;
  if (!std::getline(in, line) || line != kRangesHeader) throw IoError("ranges csv: missing or wrong header");
  std::vector<HsvRange> ranges;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    HsvRange r;
    int consumed = 0;
    if (std::sscanf(line.c_str(), "%d,%lf,%lf,%lf,%lf%n", &r.class_index, &r.h_min, &r.h_max, &r.s_min, &r.v_min,
                    &consumed) != 5 ||
        static_cast<std::size_t>(consumed) != line.size()) {
      throw IoError("ranges csv: malformed line '" + line + "'");
    }
    if (r.h_min < 0.0 || r.h_min >= 360.0 || r.h_max < r.h_min) throw IoError("ranges csv: bad hue interval");
    ranges.push_back(r);
  }
  return ranges;
}

void write_ranges_file(const std::filesystem::path& path, std::span<const HsvRange> ranges) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << format_ranges(ranges);
  if (!out) throw IoError("short write to " + path.string());
}

std::vector<HsvRange> read_ranges_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_ranges(ss.str());
}

}  // namespace rcc
