#include "rcc/synthgen.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "rcc/random.hpp"

namespace rcc {
namespace {

constexpr std::uint64_t kNoiseSalt = 0xD1B54A32D192ED03ULL;
constexpr std::uint64_t kLayoutSalt = 0x8CB92BA72F3D8DD7ULL;
constexpr std::uint64_t kSplitSalt = 0xAEF17502108EF2D9ULL;

// Shortest form that parses back to the same double.
std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    out.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!line.empty()) lines.push_back(line);
    start = end + 1;
  }
  return lines;
}

long long parse_int(std::string_view field, const char* what) {
  try {
    std::size_t used = 0;
    const std::string s(field);
    const long long v = std::stoll(s, &used);
    if (used != s.size()) throw std::invalid_argument(what);
    return v;
  } catch (const std::exception&) {
    throw IoError(std::string("bad ") + what + " field '" + std::string(field) + "'");
  }
}

std::uint64_t parse_u64(std::string_view field, const char* what) {
  try {
    std::size_t used = 0;
    const std::string s(field);
    const unsigned long long v = std::stoull(s, &used);
    if (used != s.size()) throw std::invalid_argument(what);
    return v;
  } catch (const std::exception&) {
    throw IoError(std::string("bad ") + what + " field '" + std::string(field) + "'");
  }
}

double parse_real(std::string_view field, const char* what) {
  try {
    std::size_t used = 0;
    const std::string s(field);
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(what);
    return v;
  } catch (const std::exception&) {
    throw IoError(std::string("bad ") + what + " field '" + std::string(field) + "'");
  }
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("short write to " + path.string());
}

int class_count(int total, int cls) {
  return total / kNumColorClasses + (cls < total % kNumColorClasses ? 1 : 0);
}

}  // namespace

const std::vector<ColorClass>& color_classes() {
  static const std::vector<ColorClass> classes = {
      {0, "red", {220, 30, 30}},   {1, "orange", {240, 140, 20}}, {2, "yellow", {235, 220, 40}},
      {3, "green", {30, 180, 60}}, {4, "blue", {30, 80, 220}},    {5, "purple", {140, 40, 180}},
  };
  return classes;
}

const ColorClass& color_class(int index) {
  if (index < 0 || index >= kNumColorClasses) {
    throw InvalidParameter("color class index out of range: " + std::to_string(index));
  }
  return color_classes()[static_cast<std::size_t>(index)];
}

std::optional<int> class_index(std::string_view name) {
  for (const auto& c : color_classes()) {
    if (c.name == name) return c.index;
  }
  return std::nullopt;
}

bool HueBand::contains(double hue) const {
  return lo <= hi ? (hue >= lo && hue < hi) : (hue >= lo || hue < hi);
}

HueBand nominal_hue_band(int index) {
  static constexpr HueBand bands[] = {{330, 15}, {15, 45}, {45, 75}, {75, 165}, {165, 255}, {255, 330}};
  color_class(index);
  return bands[index];
}

void IlluminationSpec::validate() const {
  for (double g : gain) {
    if (!(g >= 0.2 && g <= 2.0)) throw InvalidParameter("illumination gain outside [0.2, 2.0]: " + std::to_string(g));
  }
  if (!(gamma >= 0.5 && gamma <= 2.0)) throw InvalidParameter("gamma outside [0.5, 2.0]: " + std::to_string(gamma));
  if (!(noise_std >= 0.0 && noise_std <= 25.0)) {
    throw InvalidParameter("noise_std outside [0, 25]: " + std::to_string(noise_std));
  }
}

std::vector<Illuminant> standard_illuminants(double noise_std) {
  return {
      {"identity", {{1.0, 1.0, 1.0}, 1.0, noise_std}}, {"warm", {{1.15, 1.0, 0.8}, 1.0, noise_std}},
      {"cool", {{0.85, 0.95, 1.2}, 1.0, noise_std}},   {"dim", {{0.5, 0.5, 0.5}, 1.0, noise_std}},
      {"bright", {{1.5, 1.5, 1.5}, 1.0, noise_std}},
  };
}

Image apply_illumination(const Image& img, const IlluminationSpec& spec, std::uint64_t noise_seed) {
  spec.validate();
  Xoshiro256 rng(noise_seed);
  Image out(img.width(), img.height());
  auto src = img.pixels();
  auto dst = out.pixels();
  auto channel = [&](std::uint8_t c, double gain) {
    const double lit = std::round(255.0 * std::pow(gain * c / 255.0, spec.gamma));
    const double noise = spec.noise_std > 0.0 ? spec.noise_std * rng.normal() : 0.0;
    return to_channel(lit + noise);
  };
  for (std::size_t i = 0; i < src.size(); ++i) {
    dst[i].r = channel(src[i].r, spec.gain[0]);
    dst[i].g = channel(src[i].g, spec.gain[1]);
    dst[i].b = channel(src[i].b, spec.gain[2]);
  }
  return out;
}

Image render_patch(const ColorClass& cls, double brightness, const IlluminationSpec& spec, std::uint64_t seed,
                   int jitter) {
  if (!(brightness >= kMinBrightness && brightness <= kMaxBrightness)) {
    throw InvalidParameter("brightness outside [0.2, 1.0]: " + std::to_string(brightness));
  }
  if (jitter < 0) throw InvalidParameter("jitter must be non-negative");
  Xoshiro256 rng(seed);
  const double r = cls.base.r * brightness;
  const double g = cls.base.g * brightness;
  const double b = cls.base.b * brightness;
  Image patch(32, 32);
  for (Rgb& px : patch.pixels()) {
    px.r = to_channel(r + rng.between(-jitter, jitter));
    px.g = to_channel(g + rng.between(-jitter, jitter));
    px.b = to_channel(b + rng.between(-jitter, jitter));
  }
  return apply_illumination(patch, spec, seed ^ kNoiseSalt);
}

Scene render_scene(const ColorClass& cls, const BoundRect& rect, int canvas_width, int canvas_height,
                   const IlluminationSpec& spec, std::uint64_t seed) {
  if (rect.x < 0 || rect.y < 0 || rect.w < 1 || rect.h < 1 || rect.x + rect.w > canvas_width ||
      rect.y + rect.h > canvas_height) {
    throw InvalidParameter("scene rect outside the canvas");
  }
  Xoshiro256 rng(seed);
  const double brightness = rng.uniform(kMinBrightness, kMaxBrightness);
  Image canvas(canvas_width, canvas_height);
  for (int y = 0; y < canvas_height; ++y) {
    for (int x = 0; x < canvas_width; ++x) {
      Rgb& px = canvas.at(x, y);
      if (x >= rect.x && x < rect.x + rect.w && y >= rect.y && y < rect.y + rect.h) {
        px.r = to_channel(cls.base.r * brightness + rng.between(-kDefaultJitter, kDefaultJitter));
        px.g = to_channel(cls.base.g * brightness + rng.between(-kDefaultJitter, kDefaultJitter));
        px.b = to_channel(cls.base.b * brightness + rng.between(-kDefaultJitter, kDefaultJitter));
      } else {
        const auto v = static_cast<std::uint8_t>(245 + rng.between(-5, 5));
        px = {v, v, v};
      }
    }
  }
  return {apply_illumination(canvas, spec, seed ^ kNoiseSalt), rect, brightness};
}

std::string_view to_string(Split split) { return split == Split::kTrain ? "train" : "test"; }

std::size_t SampleManifest::count(Split s) const {
  return static_cast<std::size_t>(
      std::count_if(records.begin(), records.end(), [s](const SampleRecord& r) { return r.split == s; }));
}

std::vector<SampleRecord> SampleManifest::split(Split s) const {
  std::vector<SampleRecord> out;
  std::copy_if(records.begin(), records.end(), std::back_inserter(out),
               [s](const SampleRecord& r) { return r.split == s; });
  return out;
}

Dataset generate_dataset(const std::filesystem::path& out_dir, const DatasetConfig& cfg) {
  if (cfg.total < 1 || cfg.train < 0) throw InvalidParameter("dataset counts must be positive");
  if (cfg.train >= cfg.total) throw InvalidParameter("train count must be smaller than total count");
  if (cfg.scenes < 0) throw InvalidParameter("scene count must be non-negative");

  std::error_code ec;
  std::filesystem::create_directories(out_dir / "patches", ec);
  if (!ec) std::filesystem::create_directories(out_dir / "scenes", ec);
  if (ec) throw IoError("cannot create dataset directory " + out_dir.string() + ": " + ec.message());

  const auto illuminants = standard_illuminants(cfg.noise_std);
  const int test = cfg.total - cfg.train;

  // Stratified split: each class gets its round-robin share of the test
  // slots, chosen among its ordinals by a seeded shuffle.
  std::vector<std::vector<bool>> is_test(kNumColorClasses);
  for (int c = 0; c < kNumColorClasses; ++c) {
    const int n = class_count(cfg.total, c);
    const int t = class_count(test, c);
    std::vector<int> ordinals(static_cast<std::size_t>(n));
    for (int r = 0; r < n; ++r) ordinals[static_cast<std::size_t>(r)] = r;
    Xoshiro256 rng(cfg.seed ^ kSplitSalt ^ static_cast<std::uint64_t>(c));
    shuffle(ordinals, rng);
    is_test[static_cast<std::size_t>(c)].assign(static_cast<std::size_t>(n), false);
    for (int i = 0; i < t; ++i) is_test[static_cast<std::size_t>(c)][static_cast<std::size_t>(ordinals[i])] = true;
  }

  Dataset dataset;
  for (int k = 0; k < cfg.total; ++k) {
    const int c = k % kNumColorClasses;
    const int r = k / kNumColorClasses;
    const int n = class_count(cfg.total, c);
    const double brightness =
        n > 1 ? std::min(kMaxBrightness, kMinBrightness + (kMaxBrightness - kMinBrightness) * r / (n - 1))
              : kMaxBrightness;
    const Illuminant& illum = illuminants[static_cast<std::size_t>(r) % illuminants.size()];
    const std::uint64_t file_seed = cfg.seed ^ static_cast<std::uint64_t>(k);
    const ColorClass& cls = color_class(c);

    char name[64];
    std::snprintf(name, sizeof name, "patches/%04d_%s.ppm", k, cls.name.c_str());
    write_ppm_file(out_dir / name, render_patch(cls, brightness, illum.spec, file_seed));

    dataset.manifest.records.push_back({name, c, cls.name,
                                        is_test[static_cast<std::size_t>(c)][static_cast<std::size_t>(r)]
                                            ? Split::kTest
                                            : Split::kTrain,
                                        brightness, illum.name, file_seed});
  }
  write_text(out_dir / "manifest.csv", format_manifest(dataset.manifest));

  for (int s = 0; s < cfg.scenes; ++s) {
    const int c = s % kNumColorClasses;
    const Illuminant& illum = illuminants[static_cast<std::size_t>(s) % illuminants.size()];
    const std::uint64_t file_seed = cfg.seed ^ static_cast<std::uint64_t>(cfg.total + s);
    Xoshiro256 layout(file_seed ^ kLayoutSalt);
    BoundRect rect;
    rect.w = layout.between(48, std::max(48, cfg.scene_width * 3 / 5));
    rect.h = layout.between(40, std::max(40, cfg.scene_height * 3 / 5));
    rect.x = layout.between(4, std::max(4, cfg.scene_width - rect.w - 4));
    rect.y = layout.between(4, std::max(4, cfg.scene_height - rect.h - 4));
    const ColorClass& cls = color_class(c);
    const Scene scene = render_scene(cls, rect, cfg.scene_width, cfg.scene_height, illum.spec, file_seed);

    char name[64];
    std::snprintf(name, sizeof name, "scenes/scene_%03d.ppm", s);
    write_ppm_file(out_dir / name, scene.image);
    dataset.scenes.push_back({name, c, cls.name, scene.truth, illum.name, scene.brightness, file_seed});
  }
  write_text(out_dir / "scenes.csv", format_scenes(dataset.scenes));
  return dataset;
}

std::string format_manifest(const SampleManifest& manifest) {
  std::string out = std::string(kManifestHeader) + "\n";
  for (const auto& r : manifest.records) {
    out += r.filename + "," + std::to_string(r.class_index) + "," + r.class_name + "," +
           std::string(to_string(r.split)) + "," + format_double(r.brightness_gain) + "," + r.illuminant_name + "," +
           std::to_string(r.seed) + "\n";
  }
  return out;
}

SampleManifest parse_manifest(std::string_view csv) {
  const auto lines = split_lines(csv);
  if (lines.empty() || lines.front() != kManifestHeader) throw IoError("manifest.csv: missing or wrong header");
  SampleManifest manifest;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto f = split_fields(lines[i]);
    if (f.size() != 7) throw IoError("manifest.csv: line " + std::to_string(i + 1) + " has " + std::to_string(f.size()) + " fields");
    SampleRecord r;
    r.filename = std::string(f[0]);
    r.class_index = static_cast<int>(parse_int(f[1], "class_index"));
    r.class_name = std::string(f[2]);
    if (f[3] == "train") {
      r.split = Split::kTrain;
    } else if (f[3] == "test") {
      r.split = Split::kTest;
    } else {
      throw IoError("manifest.csv: unknown split '" + std::string(f[3]) + "'");
    }
    r.brightness_gain = parse_real(f[4], "brightness_gain");
    r.illuminant_name = std::string(f[5]);
    r.seed = parse_u64(f[6], "seed");
    if (r.class_index < 0 || r.class_index >= kNumColorClasses || color_class(r.class_index).name != r.class_name) {
      throw IoError("manifest.csv: class mismatch on line " + std::to_string(i + 1));
    }
    manifest.records.push_back(std::move(r));
  }
  return manifest;
}

SampleManifest read_manifest(const std::filesystem::path& dataset_dir) {
  return parse_manifest(read_text(dataset_dir / "manifest.csv"));
}

std::string format_scenes(const std::vector<SceneRecord>& scenes) {
  std::string out = std::string(kScenesHeader) + "\n";
  for (const auto& s : scenes) {
    out += s.filename + "," + std::to_string(s.class_index) + "," + s.class_name + "," + std::to_string(s.truth.x) +
           "," + std::to_string(s.truth.y) + "," + std::to_string(s.truth.w) + "," + std::to_string(s.truth.h) + "," +
           s.illuminant_name + "," + format_double(s.brightness) + "," + std::to_string(s.seed) + "\n";
  }
  return out;
}

std::vector<SceneRecord> parse_scenes(std::string_view csv) {
  const auto lines = split_lines(csv);
  if (lines.empty() || lines.front() != kScenesHeader) throw IoError("scenes.csv: missing or wrong header");
  std::vector<SceneRecord> scenes;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto f = split_fields(lines[i]);
    if (f.size() != 10) throw IoError("scenes.csv: line " + std::to_string(i + 1) + " is malformed");
    SceneRecord s;
    s.filename = std::string(f[0]);
    s.class_index = static_cast<int>(parse_int(f[1], "class_index"));
    s.class_name = std::string(f[2]);
    s.truth = {static_cast<int>(parse_int(f[3], "x")), static_cast<int>(parse_int(f[4], "y")),
               static_cast<int>(parse_int(f[5], "w")), static_cast<int>(parse_int(f[6], "h"))};
    s.illuminant_name = std::string(f[7]);
    s.brightness = parse_real(f[8], "brightness");
    s.seed = parse_u64(f[9], "seed");
    scenes.push_back(std::move(s));
  }
  return scenes;
}

std::vector<SceneRecord> read_scenes(const std::filesystem::path& dataset_dir) {
  return parse_scenes(read_text(dataset_dir / "scenes.csv"));
}

}  // namespace rcc
