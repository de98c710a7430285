// rcc: dataset generation, training, evaluation, detection and baseline
// comparison for the color-cube recognizer.
//
// Exit status: 0 success, 1 usage error, 2 no object found, 3 I/O error,
// 4 numeric failure.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "rcc/baseline.hpp"
#include "rcc/checkpoint.hpp"
#include "rcc/gradcheck.hpp"
#include "rcc/harness.hpp"
#include "rcc/synthgen.hpp"

namespace {

enum ExitCode : int { kOk = 0, kUsage = 1, kNoObject = 2, kIo = 3, kNumeric = 4 };

struct NumericFailure : rcc::Error {
  using rcc::Error::Error;
};

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw rcc::IoError("cannot write " + path.string());
  out << text;
  if (!out) throw rcc::IoError("short write to " + path.string());
}

struct GenOptions {
  std::string out;
  int count = 250;
  int train = 200;
  std::uint64_t seed = 0;
  int scenes = 24;
};

int run_gen(const GenOptions& o) {
  rcc::DatasetConfig cfg;
  cfg.total = o.count;
  cfg.train = o.train;
  cfg.seed = o.seed;
  cfg.scenes = o.scenes;
  const rcc::Dataset ds = rcc::generate_dataset(o.out, cfg);
  std::printf("wrote %zu patches (%zu train, %zu test) and %zu scenes to %s\n", ds.manifest.records.size(),
              ds.manifest.count(rcc::Split::kTrain), ds.manifest.count(rcc::Split::kTest), ds.scenes.size(),
              o.out.c_str());
  return kOk;
}

struct TrainOptions {
  std::string data;
  std::string out;
  std::string metrics;
  rcc::TrainConfig cfg;
};

int run_train(const TrainOptions& o) {
  const auto manifest = rcc::read_manifest(o.data);
  const auto train_split = rcc::load_split(o.data, manifest, rcc::Split::kTrain);
  const auto test_split = rcc::load_split(o.data, manifest, rcc::Split::kTest);

  const auto start = std::chrono::steady_clock::now();
  auto progress = [&](const rcc::EpochMetrics& m) {
    if (m.epoch % 25 == 0 || m.epoch == 1 || m.epoch == o.cfg.epochs) {
      const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      std::fprintf(stderr, "epoch %4d  train_loss %.4f  train_acc %.3f  val_loss %.4f  val_acc %.3f  (%.0fs)\n",
                   m.epoch, m.train_loss, m.train_acc, m.val_loss, m.val_acc, secs);
    }
  };
  rcc::TrainResult result;
  try {
    result = rcc::train(train_split.samples, test_split.samples, o.cfg, progress);
  } catch (const rcc::InvalidParameter&) {
    throw;
  } catch (const rcc::Error& e) {
    throw NumericFailure(e.what());
  }
  rcc::save_checkpoint_file(o.out, result.params);
  write_text(o.metrics, rcc::format_metrics(result.metrics));
  if (!result.metrics.empty()) {
    std::printf("final test accuracy %.4f\n", result.metrics.back().val_acc);
  }
  return kOk;
}

int run_eval(const std::string& data, const std::string& model, const std::string& report_path) {
  const auto params = rcc::load_checkpoint_file(model);
  const auto manifest = rcc::read_manifest(data);
  const auto test_split = rcc::load_split(data, manifest, rcc::Split::kTest);
  const rcc::EvalReport report = rcc::evaluate(test_split.samples, params);
  write_text(report_path, rcc::report_json(report));
  std::printf("test accuracy %.4f over %zu samples\n", report.accuracy, report.total);
  return kOk;
}

struct DetectOptions {
  std::string image;
  std::string model;
  std::string annotate;
  bool json = false;
  rcc::SegmentConfig seg;
};

int run_detect(const DetectOptions& o) {
  const auto params = rcc::load_checkpoint_file(o.model);
  rcc::Image img = rcc::read_ppm_file(o.image);
  rcc::Detection det;
  try {
    det = rcc::detect(img, params, o.seg);
  } catch (const rcc::NoObjectError&) {
    if (o.json) {
      std::printf("{\"error\":\"no_object\"}\n");
    } else {
      std::fprintf(stderr, "no object found in %s\n", o.image.c_str());
    }
    return kNoObject;
  }
  if (!o.annotate.empty()) {
    rcc::draw_rect(img, det.box);
    rcc::write_ppm_file(o.annotate, img);
  }
  if (o.json) {
    std::fputs(rcc::detection_json(det, params.class_names).c_str(), stdout);
  } else {
    std::printf("%s (%.3f) at x=%d y=%d w=%d h=%d\n", params.class_names[static_cast<std::size_t>(det.label)].c_str(),
                det.confidence, det.box.x, det.box.y, det.box.w, det.box.h);
  }
  return kOk;
}

std::vector<rcc::LabeledPatch> labeled(const rcc::LoadedSplit& split) {
  std::vector<rcc::LabeledPatch> out;
  for (std::size_t i = 0; i < split.images.size(); ++i) out.push_back({&split.images[i], split.records[i].class_index});
  return out;
}

double hsv_accuracy(const rcc::LoadedSplit& split, const std::vector<rcc::HsvRange>& ranges) {
  std::size_t ok = 0;
  for (std::size_t i = 0; i < split.images.size(); ++i) {
    const auto label = rcc::classify_hsv(split.images[i], ranges);
    if (label && *label == split.records[i].class_index) ++ok;
  }
  return split.images.empty() ? 0.0 : static_cast<double>(ok) / static_cast<double>(split.images.size());
}

int run_baseline(const std::string& data, const std::string& ranges_path, bool calibrate) {
  const auto manifest = rcc::read_manifest(data);
  const auto train_split = rcc::load_split(data, manifest, rcc::Split::kTrain);
  const auto test_split = rcc::load_split(data, manifest, rcc::Split::kTest);
  std::vector<rcc::HsvRange> ranges;
  if (calibrate) {
    ranges = rcc::calibrate_ranges(labeled(train_split));
    rcc::write_ranges_file(ranges_path, ranges);
  } else {
    ranges = rcc::read_ranges_file(ranges_path);
  }
  std::printf("{\"train_accuracy\":%.6f,\"test_accuracy\":%.6f}\n", hsv_accuracy(train_split, ranges),
              hsv_accuracy(test_split, ranges));
  return kOk;
}

int run_compare(const std::string& data, const std::string& model, const std::string& ranges_path,
                const std::string& out) {
  const auto params = rcc::load_checkpoint_file(model);
  const auto ranges = rcc::read_ranges_file(ranges_path);
  const auto manifest = rcc::read_manifest(data);
  const auto test_split = rcc::load_split(data, manifest, rcc::Split::kTest);
  std::vector<int> labels;
  for (const auto& r : test_split.records) labels.push_back(r.class_index);
  const auto gains = rcc::default_gain_sweep();
  const auto rows = rcc::compare_robustness(test_split.images, labels, params, ranges, gains);
  const std::string csv = rcc::format_comparison(rows);
  write_text(out, csv);
  std::fputs(csv.c_str(), stdout);
  return kOk;
}

int run_gradcheck(std::uint64_t seed) {
  const auto params = rcc::init_params(seed);
  const auto batch = rcc::gradcheck_batch(seed);
  const rcc::GradCheckConfig cfg;
  const auto report = rcc::gradient_check(batch, params, cfg);
  for (const auto& t : report.tensors) {
    std::printf("%-14s %6zu entries  %3zu kinks  max_rel_err %.3e  %s\n", t.name.c_str(), t.checked, t.kinks,
                t.max_rel_error, t.failures == 0 && t.kinks < t.checked ? "ok" : "FAIL");
  }
  std::printf("gradcheck %s (h=%g, tol=%g)\n", report.passed() ? "passed" : "FAILED", cfg.step, cfg.tolerance);
  return report.passed() ? kOk : kNumeric;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Color recognition with a 3x3 cube grid and a small CNN"};
  app.require_subcommand(1);

  GenOptions gen;
  auto* gen_cmd = app.add_subcommand("gen", "Generate the synthetic patch dataset and scenes");
  gen_cmd->add_option("--out", gen.out, "Output directory")->required();
  gen_cmd->add_option("--count", gen.count, "Total patches")->capture_default_str();
  gen_cmd->add_option("--train", gen.train, "Training patches")->capture_default_str();
  gen_cmd->add_option("--seed", gen.seed, "Generator seed")->capture_default_str();
  gen_cmd->add_option("--scenes", gen.scenes, "End-to-end scenes")->capture_default_str();

  TrainOptions tr;
  auto* train_cmd = app.add_subcommand("train", "Train the CNN on a generated dataset");
  train_cmd->add_option("--data", tr.data, "Dataset directory")->required();
  train_cmd->add_option("--out", tr.out, "Checkpoint output path")->required();
  train_cmd->add_option("--metrics", tr.metrics, "Per-epoch metrics CSV")->required();
  train_cmd->add_option("--epochs", tr.cfg.epochs)->capture_default_str();
  train_cmd->add_option("--lr", tr.cfg.lr)->capture_default_str();
  train_cmd->add_option("--momentum", tr.cfg.momentum)->capture_default_str();
  train_cmd->add_option("--batch", tr.cfg.batch)->capture_default_str();
  train_cmd->add_option("--seed", tr.cfg.seed)->capture_default_str();

  std::string eval_data, eval_model, eval_report;
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint on the test split");
  eval_cmd->add_option("--data", eval_data)->required();
  eval_cmd->add_option("--model", eval_model)->required();
  eval_cmd->add_option("--report", eval_report, "Report JSON output path")->required();

  DetectOptions det;
  std::string segmenter = "adaptive";
  std::string polarity = "dark";
  auto* detect_cmd = app.add_subcommand("detect", "Locate the largest object and recognize its color");
  detect_cmd->add_option("--image", det.image, "Input PPM")->required();
  detect_cmd->add_option("--model", det.model)->required();
  detect_cmd->add_option("--segmenter", segmenter)
      ->check(CLI::IsMember({"adaptive", "sobel"}))
      ->capture_default_str();
  detect_cmd->add_option("--annotate", det.annotate, "Write a copy with the box drawn in red");
  detect_cmd->add_flag("--json", det.json, "Emit the detection as JSON");
  detect_cmd->add_option("--sigma", det.seg.sigma, "Gaussian blur sigma")->capture_default_str();
  detect_cmd->add_option("--window", det.seg.window, "Adaptive threshold window")->capture_default_str();
  detect_cmd->add_option("--offset", det.seg.offset, "Adaptive threshold offset")->capture_default_str();
  detect_cmd->add_option("--edge-threshold", det.seg.edge_threshold, "Sobel edge threshold")->capture_default_str();
  detect_cmd->add_option("--polarity", polarity, "Object darker or lighter than background")
      ->check(CLI::IsMember({"dark", "light"}))
      ->capture_default_str();

  std::string base_data, base_ranges;
  bool calibrate = false;
  auto* base_cmd = app.add_subcommand("baseline", "Calibrate or score the HSV fixed-range classifier");
  base_cmd->add_option("--data", base_data)->required();
  base_cmd->add_option("--ranges", base_ranges, "Ranges CSV (written with --calibrate)")->required();
  base_cmd->add_flag("--calibrate", calibrate, "Fit ranges on the train split");

  std::string cmp_data, cmp_model, cmp_ranges, cmp_out;
  auto* cmp_cmd = app.add_subcommand("compare", "Brightness-gain sweep: CNN vs HSV baseline");
  cmp_cmd->add_option("--data", cmp_data)->required();
  cmp_cmd->add_option("--model", cmp_model)->required();
  cmp_cmd->add_option("--ranges", cmp_ranges)->required();
  cmp_cmd->add_option("--out", cmp_out)->required();

  std::uint64_t gc_seed = 0;
  auto* gc_cmd = app.add_subcommand("gradcheck", "Finite-difference check of every gradient");
  gc_cmd->add_option("--seed", gc_seed)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*gen_cmd) return run_gen(gen);
    if (*train_cmd) return run_train(tr);
    if (*eval_cmd) return run_eval(eval_data, eval_model, eval_report);
    if (*detect_cmd) {
      det.seg.mode = segmenter == "sobel" ? rcc::SegmenterMode::kSobel : rcc::SegmenterMode::kAdaptive;
      det.seg.polarity = polarity == "light" ? rcc::Polarity::kLightObject : rcc::Polarity::kDarkObject;
      return run_detect(det);
    }
    if (*base_cmd) return run_baseline(base_data, base_ranges, calibrate);
    if (*cmp_cmd) return run_compare(cmp_data, cmp_model, cmp_ranges, cmp_out);
    if (*gc_cmd) return run_gradcheck(gc_seed);
  } catch (const rcc::IoError& e) {
    std::fprintf(stderr, "rcc: %s\n", e.what());
    return kIo;
  } catch (const rcc::PpmError& e) {
    std::fprintf(stderr, "rcc: %s\n", e.what());
    return kIo;
  } catch (const rcc::CheckpointError& e) {
    std::fprintf(stderr, "rcc: %s\n", e.what());
    return kIo;
  } catch (const NumericFailure& e) {
    std::fprintf(stderr, "rcc: %s\n", e.what());
    return kNumeric;
  } catch (const rcc::NoObjectError& e) {
    std::fprintf(stderr, "rcc: %s\n", e.what());
    return kNoObject;
  } catch (const rcc::Error& e) {
    std::fprintf(stderr, "rcc: %s\n", e.what());
    return kUsage;
  }
  return kUsage;
}
