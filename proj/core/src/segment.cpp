#include "rcc/segment.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>
#include <numbers>
#include <string>

namespace rcc {
namespace {

// Clockwise around a pixel in image coordinates (y grows downward), starting west.
constexpr std::array<Point, 8> kRing = {{
    {-1, 0}, {-1, -1}, {0, -1}, {1, -1}, {1, 0}, {1, 1}, {0, 1}, {-1, 1},
}};

int ring_index(int dcol, int drow) {
  for (int k = 0; k < 8; ++k) {
    if (kRing[k].col == dcol && kRing[k].row == drow) return k;
  }
  return -1;
}

bool foreground(const BinaryMask& mask, int col, int row) {
  return mask.contains(col, row) && mask.at(col, row) != 0;
}

struct Component {
  Point first;       // first pixel in row-major scan order
  std::size_t size;  // pixel count
};

// 8-connected flood fill from `seed`; marks `visited` and reports the component.
Component flood(const BinaryMask& mask, Point seed, std::vector<std::uint8_t>& visited) {
  const int w = mask.width();
  Component comp{seed, 0};
  std::deque<Point> queue{seed};
  visited[static_cast<std::size_t>(seed.row) * w + seed.col] = 1;
  while (!queue.empty()) {
    const Point p = queue.front();
    queue.pop_front();
    ++comp.size;
    if (p.row < comp.first.row || (p.row == comp.first.row && p.col < comp.first.col)) comp.first = p;
    for (const Point& d : kRing) {
      const int c = p.col + d.col;
      const int r = p.row + d.row;
      if (!foreground(mask, c, r)) continue;
      auto& seen = visited[static_cast<std::size_t>(r) * w + c];
      if (seen) continue;
      seen = 1;
      queue.push_back({c, r});
    }
  }
  return comp;
}

Contour trace_from(const BinaryMask& mask, Point start, std::size_t component_size) {
  Contour contour;
  contour.points.push_back(start);

  // The west neighbor of a component's first scan pixel is never foreground.
  Point p = start;
  int back_dir = 0;
  const Point start_back{start.col - 1, start.row};

  const std::size_t max_steps = 8 * component_size + 16;
  for (std::size_t step = 0; step < max_steps; ++step) {
    int found = -1;
    for (int k = 1; k <= 8; ++k) {
      const int dir = (back_dir + k) % 8;
      if (foreground(mask, p.col + kRing[dir].col, p.row + kRing[dir].row)) {
        found = dir;
        break;
      }
    }
    if (found < 0) break;  // isolated pixel

    const Point next{p.col + kRing[found].col, p.row + kRing[found].row};
    const Point& prev_ring = kRing[(found + 7) % 8];
    const Point back{p.col + prev_ring.col, p.row + prev_ring.row};

    // Jacob's criterion: stop on re-entering the start pixel the same way.
    if (next == start && back == start_back) break;
    // Some shapes (a diagonal pair, for one) never re-enter the start that
    // way; the trace has closed once the first move out of it repeats. The
    // next pixel and the new backtrack depend only on this move, so the rest
    // would repeat too.
    if (step > 0 && p == start && next == contour.points[1]) {
      contour.points.pop_back();
      break;
    }

    contour.points.push_back(next);
    back_dir = ring_index(back.col - next.col, back.row - next.row);
    p = next;
  }
  return contour;
}

}  // namespace

std::vector<double> gaussian_kernel(double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw InvalidParameter("gaussian sigma must be positive, got " + std::to_string(sigma));
  }
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> kernel(2 * static_cast<std::size_t>(radius) + 1);
  double sum = 0.0;
  for (int d = -radius; d <= radius; ++d) {
    const double w = std::exp(-(d * d) / (2.0 * sigma * sigma));
    kernel[d + radius] = w;
    sum += w;
  }
  for (double& w : kernel) w /= sum;
  return kernel;
}

GrayImage gaussian_blur(const GrayImage& img, double sigma) {
  const auto kernel = gaussian_kernel(sigma);
  const int radius = static_cast<int>(kernel.size() / 2);
  const int w = img.width();
  const int h = img.height();

  std::vector<double> horizontal(static_cast<std::size_t>(w) * h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int k = -radius; k <= radius; ++k) acc += kernel[k + radius] * img.clamped(x + k, y);
      horizontal[static_cast<std::size_t>(y) * w + x] = acc;
    }
  }

  GrayImage out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int k = -radius; k <= radius; ++k) {
        const int yy = std::clamp(y + k, 0, h - 1);
        acc += kernel[k + radius] * horizontal[static_cast<std::size_t>(yy) * w + x];
      }
      out.at(x, y) = to_channel(acc);
    }
  }
  return out;
}

BinaryMask adaptive_threshold(const GrayImage& img, int window, double c, Polarity polarity) {
  if (window < 3 || window % 2 == 0) {
    throw InvalidParameter("adaptive threshold window must be odd and >= 3, got " +
                           std::to_string(window));
  }
  const int w = img.width();
  const int h = img.height();
  const int r = window / 2;

  // Summed-area table over the border-replicated image.
  const int pw = w + 2 * r;
  const int ph = h + 2 * r;
  std::vector<std::int64_t> sat(static_cast<std::size_t>(pw + 1) * (ph + 1), 0);
  auto at = [&](int x, int y) -> std::int64_t& { return sat[static_cast<std::size_t>(y) * (pw + 1) + x]; };
  for (int y = 0; y < ph; ++y) {
    std::int64_t row_sum = 0;
    for (int x = 0; x < pw; ++x) {
      row_sum += img.clamped(x - r, y - r);
      at(x + 1, y + 1) = at(x + 1, y) + row_sum;
    }
  }

  const double area = static_cast<double>(window) * window;
  BinaryMask mask(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      // Window centered at (x, y) spans padded [x, x + window) x [y, y + window).
      const std::int64_t sum = at(x + window, y + window) - at(x, y + window) - at(x + window, y) + at(x, y);
      const double mean = static_cast<double>(sum) / area;
      const double p = img.at(x, y);
      const bool fg = polarity == Polarity::kDarkObject ? p < mean - c : p > mean + c;
      mask.at(x, y) = fg ? 1 : 0;
    }
  }
  return mask;
}

GrayImage sobel_magnitude(const GrayImage& img) {
  if (img.width() < 3 || img.height() < 3) {
    throw InvalidParameter("sobel needs at least a 3x3 image");
  }
  GrayImage out(img.width(), img.height());
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      auto v = [&](int dx, int dy) { return static_cast<int>(img.clamped(x + dx, y + dy)); };
      const int gx = (v(1, -1) + 2 * v(1, 0) + v(1, 1)) - (v(-1, -1) + 2 * v(-1, 0) + v(-1, 1));
      const int gy = (v(-1, 1) + 2 * v(0, 1) + v(1, 1)) - (v(-1, -1) + 2 * v(0, -1) + v(1, -1));
      out.at(x, y) = to_channel(std::sqrt(static_cast<double>(gx) * gx + static_cast<double>(gy) * gy));
    }
  }
  return out;
}

BinaryMask thin_edges(const GrayImage& img, int threshold) {
  if (img.width() < 3 || img.height() < 3) {
    throw InvalidParameter("sobel needs at least a 3x3 image");
  }
  const int w = img.width(), h = img.height();
  std::vector<double> mag(static_cast<std::size_t>(w) * static_cast<std::size_t>(h));
  std::vector<std::uint8_t> dir(mag.size());
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      auto v = [&](int dx, int dy) { return static_cast<int>(img.clamped(x + dx, y + dy)); };
      const int gx = (v(1, -1) + 2 * v(1, 0) + v(1, 1)) - (v(-1, -1) + 2 * v(-1, 0) + v(-1, 1));
      const int gy = (v(-1, 1) + 2 * v(0, 1) + v(1, 1)) - (v(-1, -1) + 2 * v(0, -1) + v(1, -1));
      const std::size_t i = static_cast<std::size_t>(y) * static_cast<std::size_t>(w) + static_cast<std::size_t>(x);
      mag[i] = std::sqrt(static_cast<double>(gx) * gx + static_cast<double>(gy) * gy);
      // Gradient direction folded to [0, 180) and binned to 0, 45, 90, 135 degrees.
      double deg = std::atan2(static_cast<double>(gy), static_cast<double>(gx)) * 180.0 / std::numbers::pi;
      if (deg < 0.0) deg += 180.0;
      dir[i] = static_cast<std::uint8_t>(static_cast<int>(std::floor((deg + 22.5) / 45.0)) % 4);
    }
  }
  static constexpr int kStep[4][2] = {{1, 0}, {1, 1}, {0, 1}, {-1, 1}};
  BinaryMask out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * static_cast<std::size_t>(w) + static_cast<std::size_t>(x);
      if (to_channel(mag[i]) < threshold) continue;
      const auto [dx, dy] = kStep[dir[i]];
      auto at = [&](int xx, int yy) {
        xx = std::clamp(xx, 0, w - 1);
        yy = std::clamp(yy, 0, h - 1);
        return mag[static_cast<std::size_t>(yy) * static_cast<std::size_t>(w) + static_cast<std::size_t>(xx)];
      };
      // Non-strict, so both pixels of a ridge that falls between two samples survive.
      if (mag[i] >= at(x + dx, y + dy) && mag[i] >= at(x - dx, y - dy)) out.at(x, y) = 1;
    }
  }
  return out;
}

BinaryMask threshold_mask(const GrayImage& img, int threshold) {
  BinaryMask mask(img.width(), img.height());
  auto src = img.pixels();
  auto dst = mask.pixels();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = src[i] >= threshold ? 1 : 0;
  return mask;
}

BinaryMask dilate3x3(const BinaryMask& mask) {
  BinaryMask out(mask.width(), mask.height());
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      std::uint8_t v = mask.at(x, y);
      for (int dy = -1; dy <= 1 && !v; ++dy) {
        for (int dx = -1; dx <= 1 && !v; ++dx) {
          if (foreground(mask, x + dx, y + dy)) v = 1;
        }
      }
      out.at(x, y) = v;
    }
  }
  return out;
}

std::vector<Contour> trace_contours(const BinaryMask& mask) {
  std::vector<Contour> contours;
  std::vector<std::uint8_t> visited(mask.size(), 0);
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      if (!mask.at(x, y) || visited[static_cast<std::size_t>(y) * mask.width() + x]) continue;
      const Component comp = flood(mask, {x, y}, visited);
      contours.push_back(trace_from(mask, comp.first, comp.size));
    }
  }
  return contours;
}

Contour largest_contour(std::span<const Contour> contours, const BinaryMask& mask) {
  if (contours.empty()) throw NoObjectError();

  const Contour* best = nullptr;
  Component best_comp{{0, 0}, 0};
  std::vector<std::uint8_t> visited(mask.size(), 0);
  for (const Contour& contour : contours) {
    if (contour.points.empty()) throw InvalidParameter("empty contour");
    const Point seed = contour.points.front();
    if (!foreground(mask, seed.col, seed.row)) {
      throw InvalidParameter("contour does not lie on the mask foreground");
    }
    std::fill(visited.begin(), visited.end(), 0);
    const Component comp = flood(mask, seed, visited);
    const bool earlier = comp.first.row < best_comp.first.row ||
                         (comp.first.row == best_comp.first.row && comp.first.col < best_comp.first.col);
    if (!best || comp.size > best_comp.size || (comp.size == best_comp.size && earlier)) {
      best = &contour;
      best_comp = comp;
    }
  }
  return *best;
}

BoundRect minimum_bounding_rect(const Contour& contour) {
  if (contour.points.empty()) throw InvalidParameter("bounding rect of an empty contour");
  int min_c = contour.points.front().col, max_c = min_c;
  int min_r = contour.points.front().row, max_r = min_r;
  for (const Point& p : contour.points) {
    min_c = std::min(min_c, p.col);
    max_c = std::max(max_c, p.col);
    min_r = std::min(min_r, p.row);
    max_r = std::max(max_r, p.row);
  }
  return {min_c, min_r, max_c - min_c + 1, max_r - min_r + 1};
}

BinaryMask segment_mask(const Image& img, const SegmentConfig& cfg) {
  const GrayImage blurred = gaussian_blur(rgb_to_gray(img), cfg.sigma);
  if (cfg.mode == SegmenterMode::kSobel) {
    // One dilation links the thinned edge pixels into closed outlines.
    return dilate3x3(thin_edges(blurred, cfg.edge_threshold));
  }
  return adaptive_threshold(blurred, cfg.window, cfg.offset, cfg.polarity);
}

BoundRect detect_bounding_box(const Image& img, const SegmentConfig& cfg) {
  const BinaryMask mask = segment_mask(img, cfg);
  const auto contours = trace_contours(mask);
  if (contours.empty()) throw NoObjectError();
  return minimum_bounding_rect(largest_contour(contours, mask));
}

}  // namespace rcc
