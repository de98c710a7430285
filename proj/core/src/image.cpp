#include "rcc/image.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <iterator>
#include <limits>

namespace rcc {
namespace {

class HeaderReader {
 public:
  explicit HeaderReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  // Skips whitespace and '#' comments running to end of line.
  void skip_space() {
    while (pos_ < bytes_.size()) {
      const auto c = bytes_[pos_];
      if (c == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n' && bytes_[pos_] != '\r') ++pos_;
      } else if (std::isspace(c)) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  long number(const char* field) {
    skip_space();
    if (pos_ >= bytes_.size() || !std::isdigit(bytes_[pos_])) {
      throw PpmError(PpmErrorKind::kMalformedHeader, std::string("ppm: expected ") + field);
    }
    long value = 0;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      value = value * 10 + (bytes_[pos_] - '0');
      if (value > std::numeric_limits<int>::max()) {
        throw PpmError(PpmErrorKind::kMalformedHeader, std::string("ppm: ") + field + " too large");
      }
      ++pos_;
    }
    return value;
  }

  std::size_t pos() const { return pos_; }
  void advance(std::size_t n) { pos_ += n; }
  bool at_end() const { return pos_ >= bytes_.size(); }
  std::uint8_t peek() const { return bytes_[pos_]; }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

Image read_ppm(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '6') {
    throw PpmError(PpmErrorKind::kMalformedHeader, "ppm: missing P6 magic");
  }
  HeaderReader reader(bytes);
  reader.advance(2);
  const long width = reader.number("width");
  const long height = reader.number("height");
  const long maxval = reader.number("maxval");
  if (width < 1 || height < 1) {
    throw PpmError(PpmErrorKind::kMalformedHeader, "ppm: zero image dimension");
  }
  if (maxval != 255) {
    throw PpmError(PpmErrorKind::kBadMaxval, "ppm: maxval must be 255, got " + std::to_string(maxval));
  }
  // Exactly one whitespace byte separates maxval from the payload.
  if (reader.at_end() || !std::isspace(reader.peek())) {
    throw PpmError(PpmErrorKind::kMalformedHeader, "ppm: missing separator after maxval");
  }
  reader.advance(1);

  const std::size_t count = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  const std::size_t available = bytes.size() - reader.pos();
  if (available / 3 < count) {
    throw PpmError(PpmErrorKind::kTruncated,
                   "ppm: payload holds " + std::to_string(available / 3) + " pixels, header declares " +
                       std::to_string(count));
  }

  Image img(static_cast<int>(width), static_cast<int>(height));
  auto src = bytes.subspan(reader.pos(), count * 3);
  auto dst = img.pixels();
  for (std::size_t i = 0; i < count; ++i) {
    dst[i] = Rgb{src[3 * i], src[3 * i + 1], src[3 * i + 2]};
  }
  return img;
}

Bytes write_ppm(const Image& img) {
  const std::string header =
      "P6\n" + std::to_string(img.width()) + " " + std::to_string(img.height()) + "\n255\n";
  Bytes out;
  out.reserve(header.size() + img.size() * 3);
  out.insert(out.end(), header.begin(), header.end());
  for (const Rgb& px : img.pixels()) {
    out.push_back(px.r);
    out.push_back(px.g);
    out.push_back(px.b);
  }
  return out;
}

Image read_ppm_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  Bytes bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return read_ppm(bytes);
}

void write_ppm_file(const std::filesystem::path& path, const Image& img) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  const Bytes bytes = write_ppm(img);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("short write to " + path.string());
}

GrayImage rgb_to_gray(const Image& img) {
  GrayImage gray(img.width(), img.height());
  auto src = img.pixels();
  auto dst = gray.pixels();
  for (std::size_t i = 0; i < src.size(); ++i) {
    dst[i] = to_channel(0.299 * src[i].r + 0.587 * src[i].g + 0.114 * src[i].b);
  }
  return gray;
}

HsvPixel rgb_to_hsv(double r, double g, double b) noexcept {
  const double max = std::max({r, g, b});
  const double min = std::min({r, g, b});
  const double delta = max - min;

  HsvPixel out;
  out.v = max / 255.0;
  out.s = max > 0.0 ? delta / max : 0.0;
  if (delta <= 0.0) return out;  // achromatic: h = 0

  double h;
  if (max == r) {
    h = 60.0 * (g - b) / delta;
  } else if (max == g) {
    h = 120.0 + 60.0 * (b - r) / delta;
  } else {
    h = 240.0 + 60.0 * (r - g) / delta;
  }
  if (h < 0.0) h += 360.0;
  if (h >= 360.0) h -= 360.0;
  out.h = h;
  return out;
}

HsvPixel mean_hsv(const Image& img) noexcept {
  double r = 0.0, g = 0.0, b = 0.0;
  for (const Rgb& px : img.pixels()) {
    r += px.r;
    g += px.g;
    b += px.b;
  }
  const double n = static_cast<double>(img.size());
  return rgb_to_hsv(r / n, g / n, b / n);
}

}  // namespace rcc
