#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "rcc/baseline.hpp"
#include "rcc/cubegrid.hpp"
#include "rcc/gradcheck.hpp"
#include "rcc/network.hpp"
#include "rcc/segment.hpp"
#include "rcc/synthgen.hpp"

namespace rcc {

/// Images and network inputs of one manifest split, in manifest order.
struct LoadedSplit {
  std::vector<SampleRecord> records;
  std::vector<Image> images;
  std::vector<Sample> samples;
};

LoadedSplit load_split(const std::filesystem::path& dataset_dir, const SampleManifest& manifest, Split split);

struct EpochMetrics {
  int epoch = 0;  // 1-based
  double train_loss = 0.0;
  double train_acc = 0.0;
  double val_loss = 0.0;
  double val_acc = 0.0;
};

struct TrainConfig {
  int epochs = 300;
  double lr = 0.01;
  double momentum = 0.9;
  int batch = 16;
  std::uint64_t seed = 0;
};

struct TrainResult {
  NetworkParams params;
  std::vector<EpochMetrics> metrics;
};

using EpochCallback = std::function<void(const EpochMetrics&)>;

/// Minibatch SGD with momentum. The train split is reshuffled every epoch
/// from a seeded generator; a trailing short batch is kept. After each epoch
/// both splits are scored with the updated parameters. The validation split
/// is the test split.
TrainResult train(std::span<const Sample> train_set, std::span<const Sample> val_set, const TrainConfig& cfg,
                  const EpochCallback& on_epoch = {});

inline constexpr const char* kMetricsHeader = "epoch,train_loss,train_acc,val_loss,val_acc";
std::string format_metrics(std::span<const EpochMetrics> metrics);

struct SplitScore {
  double loss = 0.0;
  double accuracy = 0.0;
};
SplitScore score(std::span<const Sample> samples, const NetworkParams& params);

int predict_label(const Tensor& input, const NetworkParams& params);

struct EvalReport {
  std::size_t total = 0;
  double accuracy = 0.0;
  std::array<std::array<int, kNumClasses>, kNumClasses> confusion{};  // [truth][predicted]
  std::array<double, kNumClasses> per_class_accuracy{};
};

/// Confusion matrix and accuracies from paired labels.
EvalReport make_report(std::span<const int> truth, std::span<const int> predicted);
EvalReport evaluate(std::span<const Sample> samples, const NetworkParams& params);
std::string report_json(const EvalReport& report);

struct Detection {
  BoundRect box;
  int label = 0;
  double confidence = 0.0;
  std::array<int, kGridCells> cube_labels{};
};

/// Box the largest object, cut the 3x3 cube grid, classify each cube and
/// vote. Throws NoObjectError when segmentation finds nothing.
Detection detect(const Image& img, const NetworkParams& params, const SegmentConfig& seg = {},
                 const CubeSpec& cubes = {});

/// {"box":{"x","y","w","h"},"label","confidence","cube_labels"} in that order.
std::string detection_json(const Detection& det, std::span<const std::string> class_names);

/// 1-px rectangle outline.
void draw_rect(Image& img, const BoundRect& rect, Rgb color = {255, 0, 0});

struct RobustnessRow {
  double gain = 1.0;
  double cnn_acc = 0.0;
  double hsv_acc = 0.0;
};

std::vector<double> default_gain_sweep();

/// Scales every test image by a uniform brightness gain (no noise) and scores
/// both classifiers on the result. An HSV "unknown" counts as wrong.
std::vector<RobustnessRow> compare_robustness(std::span<const Image> images, std::span<const int> labels,
                                              const NetworkParams& params, std::span<const HsvRange> ranges,
                                              std::span<const double> gains);

inline constexpr const char* kComparisonHeader = "gain,cnn_acc,hsv_acc";
std::string format_comparison(std::span<const RobustnessRow> rows);

/// Two labeled uniform-noise inputs derived from `seed` for gradient checking.
std::vector<Sample> gradcheck_batch(std::uint64_t seed);

}  // namespace rcc
