#include "rcc/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include <json.hpp>

#include "rcc/random.hpp"

namespace rcc {
namespace {

constexpr std::uint64_t kShuffleSalt = 0x3C6EF372FE94F82BULL;
constexpr std::uint64_t kGradcheckSalt = 0xA54FF53A5F1D36F1ULL;

std::string fixed6(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

}  // namespace

LoadedSplit load_split(const std::filesystem::path& dataset_dir, const SampleManifest& manifest, Split split) {
  LoadedSplit out;
  out.records = manifest.split(split);
  for (const auto& r : out.records) {
    Image img = read_ppm_file(dataset_dir / r.filename);
    out.samples.push_back({image_to_tensor(img), r.class_index});
    out.images.push_back(std::move(img));
  }
  return out;
}

int predict_label(const Tensor& input, const NetworkParams& params) {
  const Tensor logits = network_logits(input, params);
  std::size_t best = 0;
  for (std::size_t k = 1; k < logits.size(); ++k) {
    if (logits[k] > logits[best]) best = k;
  }
  return static_cast<int>(best);
}

SplitScore score(std::span<const Sample> samples, const NetworkParams& params) {
  if (samples.empty()) throw InvalidParameter("cannot score an empty split");
  double loss = 0.0;
  int correct = 0;
  for (const Sample& s : samples) {
    const Tensor logits = network_logits(s.input, params);
    loss += softmax_cross_entropy(logits, s.label).loss;
    std::size_t best = 0;
    for (std::size_t k = 1; k < logits.size(); ++k) {
      if (logits[k] > logits[best]) best = k;
    }
    if (static_cast<int>(best) == s.label) ++correct;
  }
  const double n = static_cast<double>(samples.size());
  return {loss / n, correct / n};
}

TrainResult train(std::span<const Sample> train_set, std::span<const Sample> val_set, const TrainConfig& cfg,
                  const EpochCallback& on_epoch) {
  if (cfg.epochs < 0) throw InvalidParameter("epochs must be non-negative");
  if (cfg.batch < 1) throw InvalidParameter("batch size must be positive");
  if (train_set.empty() || val_set.empty()) throw InvalidParameter("training needs non-empty train and test splits");

  TrainResult result{init_params(cfg.seed), {}};
  NetworkParams velocity = result.params.zeros_like();
  Xoshiro256 rng(cfg.seed ^ kShuffleSalt);

  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<Sample> batch;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    shuffle(order, rng);
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.batch)) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch));
      batch.clear();
      for (std::size_t i = start; i < end; ++i) batch.push_back(train_set[order[i]]);
      const BatchGradient g = network_backward(batch, result.params);
      sgd_step(result.params, g.grad, cfg.lr, cfg.momentum, velocity);
    }
    const SplitScore tr = score(train_set, result.params);
    const SplitScore va = score(val_set, result.params);
    EpochMetrics m{epoch, tr.loss, tr.accuracy, va.loss, va.accuracy};
    if (!std::isfinite(m.train_loss) || !std::isfinite(m.val_loss)) {
      throw Error("training diverged at epoch " + std::to_string(epoch));
    }
    result.metrics.push_back(m);
    if (on_epoch) on_epoch(m);
  }
  return result;
}

std::string format_metrics(std::span<const EpochMetrics> metrics) {
  std::string out = std::string(kMetricsHeader) + "\n";
  for (const auto& m : metrics) {
    out += std::to_string(m.epoch) + "," + fixed6(m.train_loss) + "," + fixed6(m.train_acc) + "," +
           fixed6(m.val_loss) + "," + fixed6(m.val_acc) + "\n";
  }
  return out;
}

EvalReport make_report(std::span<const int> truth, std::span<const int> predicted) {
  if (truth.size() != predicted.size()) throw InvalidParameter("label count mismatch");
  if (truth.empty()) throw InvalidParameter("cannot evaluate an empty split");
  EvalReport report;
  report.total = truth.size();
  std::size_t correct = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] < 0 || truth[i] >= kNumClasses || predicted[i] < 0 || predicted[i] >= kNumClasses) {
      throw InvalidParameter("label out of range in evaluation");
    }
    ++report.confusion[static_cast<std::size_t>(truth[i])][static_cast<std::size_t>(predicted[i])];
    if (truth[i] == predicted[i]) ++correct;
  }
  report.accuracy = static_cast<double>(correct) / static_cast<double>(report.total);
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    const int row = std::accumulate(report.confusion[c].begin(), report.confusion[c].end(), 0);
    report.per_class_accuracy[c] = row > 0 ? static_cast<double>(report.confusion[c][c]) / row : 0.0;
  }
  return report;
}

EvalReport evaluate(std::span<const Sample> samples, const NetworkParams& params) {
  std::vector<int> truth, predicted;
  for (const Sample& s : samples) {
    truth.push_back(s.label);
    predicted.push_back(predict_label(s.input, params));
  }
  return make_report(truth, predicted);
}

std::string report_json(const EvalReport& report) {
  nlohmann::ordered_json j;
  j["accuracy"] = report.accuracy;
  j["total"] = report.total;
  j["class_names"] = default_class_names();
  j["per_class_accuracy"] = report.per_class_accuracy;
  j["confusion"] = report.confusion;
  return j.dump(2) + "\n";
}

Detection detect(const Image& img, const NetworkParams& params, const SegmentConfig& seg, const CubeSpec& cubes) {
  Detection det;
  det.box = detect_bounding_box(img, seg);
  const CubeGrid grid = extract_color_cubes(img, det.box, cubes);

  std::vector<int> labels;
  std::vector<std::vector<double>> confidences;
  for (const Image& cube : grid.cubes) {
    const Image net_in = cube.width() == kCubeSize ? cube : resize_nearest(cube, kCubeSize, kCubeSize);
    const Tensor probs = network_forward(net_in, params);
    confidences.emplace_back(probs.data().begin(), probs.data().end());
    std::size_t best = 0;
    for (std::size_t k = 1; k < probs.size(); ++k) {
      if (probs[k] > probs[best]) best = k;
    }
    labels.push_back(static_cast<int>(best));
  }
  const Vote vote = aggregate_votes(labels, confidences);
  det.label = vote.label;
  det.confidence = vote.confidence;
  std::copy(labels.begin(), labels.end(), det.cube_labels.begin());
  return det;
}

std::string detection_json(const Detection& det, std::span<const std::string> class_names) {
  auto name = [&](int k) {
    return k >= 0 && static_cast<std::size_t>(k) < class_names.size() ? class_names[static_cast<std::size_t>(k)]
                                                                      : std::to_string(k);
  };
  nlohmann::ordered_json j;
  j["box"] = {{"x", det.box.x}, {"y", det.box.y}, {"w", det.box.w}, {"h", det.box.h}};
  j["label"] = name(det.label);
  j["confidence"] = det.confidence;
  nlohmann::ordered_json cubes = nlohmann::ordered_json::array();
  for (int k : det.cube_labels) cubes.push_back(name(k));
  j["cube_labels"] = cubes;
  return j.dump() + "\n";
}

void draw_rect(Image& img, const BoundRect& rect, Rgb color) {
  const int x0 = rect.x, y0 = rect.y, x1 = rect.x + rect.w - 1, y1 = rect.y + rect.h - 1;
  for (int x = x0; x <= x1; ++x) {
    if (img.contains(x, y0)) img.at(x, y0) = color;
    if (img.contains(x, y1)) img.at(x, y1) = color;
  }
  for (int y = y0; y <= y1; ++y) {
    if (img.contains(x0, y)) img.at(x0, y) = color;
    if (img.contains(x1, y)) img.at(x1, y) = color;
  }
}

std::vector<double> default_gain_sweep() { return {0.4, 0.6, 0.8, 1.0, 1.2, 1.4, 1.6}; }

std::vector<RobustnessRow> compare_robustness(std::span<const Image> images, std::span<const int> labels,
                                              const NetworkParams& params, std::span<const HsvRange> ranges,
                                              std::span<const double> gains) {
  if (images.empty() || images.size() != labels.size()) throw InvalidParameter("comparison needs labeled images");
  std::vector<RobustnessRow> rows;
  for (double gain : gains) {
    const IlluminationSpec spec{{gain, gain, gain}, 1.0, 0.0};
    int cnn_ok = 0, hsv_ok = 0;
    for (std::size_t i = 0; i < images.size(); ++i) {
      const Image lit = apply_illumination(images[i], spec, 0);
      if (predict_label(image_to_tensor(lit), params) == labels[i]) ++cnn_ok;
      const auto hsv = classify_hsv(lit, ranges);
      if (hsv && *hsv == labels[i]) ++hsv_ok;
    }
    const double n = static_cast<double>(images.size());
    rows.push_back({gain, cnn_ok / n, hsv_ok / n});
  }
  return rows;
}

std::string format_comparison(std::span<const RobustnessRow> rows) {
  std::string out = std::string(kComparisonHeader) + "\n";
  for (const auto& r : rows) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "%.2f,%.6f,%.6f\n", r.gain, r.cnn_acc, r.hsv_acc);
    out += buf;
  }
  return out;
}

std::vector<Sample> gradcheck_batch(std::uint64_t seed) {
  // Uniform noise rather than rendered patches: flat color fields put many
  // pooling windows within a step size of a tie, and a central difference
  // straddling an argmax switch measures the kink, not the gradient.
  Xoshiro256 rng(seed ^ kGradcheckSalt);
  std::vector<Sample> batch;
  for (std::uint64_t i = 0; i < 2; ++i) {
    Sample s{Tensor({3, kCubeSize, kCubeSize}), static_cast<int>((seed + 3 * i) % kNumClasses)};
    for (double& v : s.input.data()) v = rng.uniform();
    batch.push_back(std::move(s));
  }
  return batch;
}

}  // namespace rcc
