#include "rcc/cubegrid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace rcc {

Image crop(const Image& img, const BoundRect& rect) {
  if (rect.x < 0 || rect.y < 0 || rect.w < 1 || rect.h < 1 || rect.x + rect.w > img.width() ||
      rect.y + rect.h > img.height()) {
    throw InvalidParameter("crop rect (" + std::to_string(rect.x) + "," + std::to_string(rect.y) + "," +
                           std::to_string(rect.w) + "," + std::to_string(rect.h) +
                           ") outside image bounds");
  }
  Image out(rect.w, rect.h);
  for (int y = 0; y < rect.h; ++y) {
    const auto src = img.row(rect.y + y).subspan(rect.x, rect.w);
    std::copy(src.begin(), src.end(), out.pixels().begin() + static_cast<std::ptrdiff_t>(y) * rect.w);
  }
  return out;
}

Image resize_nearest(const Image& img, int new_width, int new_height) {
  if (new_width < 1 || new_height < 1) throw InvalidParameter("resize target must be at least 1x1");
  Image out(new_width, new_height);
  const double sx = static_cast<double>(img.width()) / new_width;
  const double sy = static_cast<double>(img.height()) / new_height;
  for (int y = 0; y < new_height; ++y) {
    const int src_y = std::min(static_cast<int>(std::floor((y + 0.5) * sy)), img.height() - 1);
    for (int x = 0; x < new_width; ++x) {
      const int src_x = std::min(static_cast<int>(std::floor((x + 0.5) * sx)), img.width() - 1);
      out.at(x, y) = img.at(src_x, src_y);
    }
  }
  return out;
}

Image working_crop(const Image& img, const BoundRect& rect, const CubeSpec& spec) {
  Image box = crop(img, rect);
  const int min_side = 3 * spec.size;
  if (box.width() >= min_side && box.height() >= min_side) return box;

  const double scale = std::max(static_cast<double>(min_side) / box.width(),
                                static_cast<double>(min_side) / box.height());
  const int w = std::max(min_side, static_cast<int>(std::lround(box.width() * scale)));
  const int h = std::max(min_side, static_cast<int>(std::lround(box.height() * scale)));
  return resize_nearest(box, w, h);
}

CubeGrid extract_color_cubes(const Image& img, const BoundRect& rect, const CubeSpec& spec) {
  if (spec.size < 1 || spec.size % 2 != 0) {
    throw InvalidParameter("cube size must be positive and even, got " + std::to_string(spec.size));
  }
  const Image work = working_crop(img, rect, spec);
  const int half = spec.size / 2;

  CubeGrid grid;
  grid.work_width = work.width();
  grid.work_height = work.height();
  // Cube centers sit at the midpoints of the 3x3 cells of the working crop.
  for (int i = 0; i < 3; ++i) {
    const int x1 = static_cast<int>(std::round((2.0 * i + 1.0) * work.width() / 6.0));
    for (int j = 0; j < 3; ++j) {
      const int y1 = static_cast<int>(std::round((2.0 * j + 1.0) * work.height() / 6.0));
      grid.centers.push_back({x1, y1});
      grid.cubes.push_back(crop(work, {x1 - half, y1 - half, spec.size, spec.size}));
    }
  }
  return grid;
}

Vote aggregate_votes(std::span<const int> labels, std::span<const std::vector<double>> confidences) {
  if (labels.size() != kGridCells || confidences.size() != kGridCells) {
    throw InvalidParameter("aggregate_votes needs exactly 9 predictions, got " +
                           std::to_string(labels.size()));
  }
  const std::size_t classes = confidences.front().size();
  for (std::size_t n = 0; n < kGridCells; ++n) {
    if (confidences[n].size() != classes || labels[n] < 0 || static_cast<std::size_t>(labels[n]) >= classes) {
      throw InvalidParameter("inconsistent prediction at cube " + std::to_string(n));
    }
  }

  std::vector<int> count(classes, 0);
  std::vector<double> prob_sum(classes, 0.0);
  for (std::size_t n = 0; n < kGridCells; ++n) {
    ++count[labels[n]];
    prob_sum[labels[n]] += confidences[n][labels[n]];
  }

  Vote best{-1, -1.0};
  int best_count = 0;
  // Walk cubes in grid order so that ties resolve identically on every run.
  for (std::size_t n = 0; n < kGridCells; ++n) {
    const int k = labels[n];
    const double mean = prob_sum[k] / count[k];
    const bool better = count[k] > best_count ||
                        (count[k] == best_count && (mean > best.confidence ||
                                                     (mean == best.confidence && k < best.label)));
    if (better) {
      best = {k, mean};
      best_count = count[k];
    }
  }
  return best;
}

}  // namespace rcc
