#pragma once

// Deterministic synthetic color data: 32x32 training patches of six color
// classes over a dark-to-light brightness ramp under simulated illuminants,
// plus full scenes (one colored rectangle on a light background) for
// end-to-end detection.

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rcc/image.hpp"
#include "rcc/segment.hpp"

namespace rcc {

inline constexpr int kNumColorClasses = 6;

struct ColorClass {
  int index = 0;
  std::string name;
  Rgb base;
};

/// red, orange, yellow, green, blue, purple (indices 0..5).
const std::vector<ColorClass>& color_classes();
const ColorClass& color_class(int index);
std::optional<int> class_index(std::string_view name);

/// Hue band [lo, hi) in degrees used to sanity-check generated colors; red wraps.
struct HueBand {
  double lo;
  double hi;
  bool contains(double hue) const;
};
HueBand nominal_hue_band(int class_index);

struct IlluminationSpec {
  std::array<double, 3> gain = {1.0, 1.0, 1.0};  // each in [0.2, 2.0]
  double gamma = 1.0;                           // [0.5, 2.0]
  double noise_std = 0.0;                       // [0, 25] gray levels

  void validate() const;
};

struct Illuminant {
  std::string name;
  IlluminationSpec spec;
};

/// identity, warm, cool, dim, bright, all with the given sensor noise.
std::vector<Illuminant> standard_illuminants(double noise_std);

/// out = clamp(round(round(255 * (gain * c / 255)^gamma) + N(0, noise_std)))
Image apply_illumination(const Image& img, const IlluminationSpec& spec, std::uint64_t noise_seed);

inline constexpr double kMinBrightness = 0.2;
inline constexpr double kMaxBrightness = 1.0;
inline constexpr int kDefaultJitter = 5;

/// Constant base color scaled by brightness, per-channel uniform jitter in
/// [-jitter, jitter], then illumination.
Image render_patch(const ColorClass& cls, double brightness, const IlluminationSpec& spec, std::uint64_t seed,
                   int jitter = kDefaultJitter);

struct Scene {
  Image image;
  BoundRect truth;
  double brightness = 1.0;
};

/// Light background (245 +/- 5) with one filled rectangle of the class color
/// at `rect`; brightness is drawn from the dark-to-light ramp.
Scene render_scene(const ColorClass& cls, const BoundRect& rect, int canvas_width, int canvas_height,
                   const IlluminationSpec& spec, std::uint64_t seed);

enum class Split { kTrain, kTest };
std::string_view to_string(Split split);

struct SampleRecord {
  std::string filename;  // relative to the dataset directory
  int class_index = 0;
  std::string class_name;
  Split split = Split::kTrain;
  double brightness_gain = 1.0;
  std::string illuminant_name;
  std::uint64_t seed = 0;
};

struct SampleManifest {
  std::vector<SampleRecord> records;

  std::size_t count(Split split) const;
  std::vector<SampleRecord> split(Split split) const;
};

struct SceneRecord {
  std::string filename;
  int class_index = 0;
  std::string class_name;
  BoundRect truth;
  std::string illuminant_name;
  double brightness = 1.0;
  std::uint64_t seed = 0;
};

struct DatasetConfig {
  int total = 250;
  int train = 200;
  std::uint64_t seed = 0;
  int scenes = 24;
  double noise_std = 2.0;
  int scene_width = 200;
  int scene_height = 160;
};

struct Dataset {
  SampleManifest manifest;
  std::vector<SceneRecord> scenes;
};

/// Writes patches/*.ppm, manifest.csv, scenes/*.ppm and scenes.csv under
/// `out_dir`. Output is a pure function of the config.
Dataset generate_dataset(const std::filesystem::path& out_dir, const DatasetConfig& cfg = {});

inline constexpr const char* kManifestHeader =
    "filename,class_index,class_name,split,brightness_gain,illuminant_name,seed";
inline constexpr const char* kScenesHeader = "filename,class_index,class_name,x,y,w,h,illuminant_name,brightness,seed";

std::string format_manifest(const SampleManifest& manifest);
SampleManifest parse_manifest(std::string_view csv);
SampleManifest read_manifest(const std::filesystem::path& dataset_dir);

std::string format_scenes(const std::vector<SceneRecord>& scenes);
std::vector<SceneRecord> parse_scenes(std::string_view csv);
std::vector<SceneRecord> read_scenes(const std::filesystem::path& dataset_dir);

}  // namespace rcc
