#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <string>

#include "rcc/image.hpp"
#include "test_util.hpp"

namespace rcc {
namespace {

Bytes bytes_of(const std::string& s) { return Bytes(s.begin(), s.end()); }

// Inverse hexcone conversion, used only to check rgb_to_hsv.
Rgb hsv_to_rgb(const HsvPixel& p) {
  const double c = p.v * p.s;
  const double hp = p.h / 60.0;
  const double x = c * (1.0 - std::abs(std::fmod(hp, 2.0) - 1.0));
  double r = 0, g = 0, b = 0;
  if (hp < 1) {
    r = c, g = x;
  } else if (hp < 2) {
    r = x, g = c;
  } else if (hp < 3) {
    g = c, b = x;
  } else if (hp < 4) {
    g = x, b = c;
  } else if (hp < 5) {
    r = x, b = c;
  } else {
    r = c, b = x;
  }
  const double m = p.v - c;
  return {to_channel((r + m) * 255.0), to_channel((g + m) * 255.0), to_channel((b + m) * 255.0)};
}

TEST(Raster, RejectsEmptyDimensions) {
  EXPECT_THROW(Image(0, 3), InvalidParameter);
  EXPECT_THROW(GrayImage(2, -1), InvalidParameter);
  EXPECT_NO_THROW(Image(1, 1));
}

TEST(Raster, ClampedReadReplicatesBorders) {
  GrayImage g(2, 2);
  g.at(0, 0) = 1;
  g.at(1, 0) = 2;
  g.at(0, 1) = 3;
  g.at(1, 1) = 4;
  EXPECT_EQ(g.clamped(-5, -5), 1);
  EXPECT_EQ(g.clamped(9, 0), 2);
  EXPECT_EQ(g.clamped(-1, 7), 3);
  EXPECT_EQ(g.clamped(3, 3), 4);
}

TEST(ToChannel, RoundsHalfAwayFromZeroAndClamps) {
  EXPECT_EQ(to_channel(0.5), 1);
  EXPECT_EQ(to_channel(1.5), 2);
  EXPECT_EQ(to_channel(2.5), 3);
  EXPECT_EQ(to_channel(2.49), 2);
  EXPECT_EQ(to_channel(-3.0), 0);
  EXPECT_EQ(to_channel(254.5), 255);
  EXPECT_EQ(to_channel(1e9), 255);
  EXPECT_EQ(to_channel(std::nan("")), 0);
}

TEST(Ppm, ReadsSinglePixel) {
  Bytes b = bytes_of("P6\n1 1\n255\n");
  b.insert(b.end(), {255, 0, 0});
  const Image img = read_ppm(b);
  ASSERT_EQ(img.width(), 1);
  ASSERT_EQ(img.height(), 1);
  EXPECT_EQ(img.at(0, 0), (Rgb{255, 0, 0}));
}

TEST(Ppm, WritesCanonicalHeader) {
  const Bytes b = write_ppm(Image(1, 1));
  ASSERT_EQ(b.size(), 14u);
  EXPECT_EQ(std::string(b.begin(), b.begin() + 11), "P6\n1 1\n255\n");
  EXPECT_EQ(b[11], 0);
  EXPECT_EQ(b[12], 0);
  EXPECT_EQ(b[13], 0);
}

TEST(Ppm, PayloadIsRowMajor) {
  Image img(2, 1);
  img.at(0, 0) = {1, 2, 3};
  img.at(1, 0) = {4, 5, 6};
  const Bytes b = write_ppm(img);
  const Bytes payload(b.end() - 6, b.end());
  EXPECT_EQ(payload, (Bytes{1, 2, 3, 4, 5, 6}));
}

TEST(Ppm, ToleratesHeaderComments) {
  Bytes b = bytes_of("P6\n# made by hand\n2 1 # size\n255\n");
  b.insert(b.end(), {1, 2, 3, 4, 5, 6});
  const Image img = read_ppm(b);
  EXPECT_EQ(img.at(1, 0), (Rgb{4, 5, 6}));
}

TEST(Ppm, TruncatedPayload) {
  Bytes b = bytes_of("P6\n2 2\n255\n");
  b.insert(b.end(), 9, 7);
  try {
    read_ppm(b);
    FAIL() << "expected a parse error";
  } catch (const PpmError& e) {
    EXPECT_EQ(e.kind(), PpmErrorKind::kTruncated);
  }
}

TEST(Ppm, BadMaxval) {
  Bytes b = bytes_of("P6\n1 1\n65535\n");
  b.insert(b.end(), 6, 0);
  try {
    read_ppm(b);
    FAIL() << "expected a parse error";
  } catch (const PpmError& e) {
    EXPECT_EQ(e.kind(), PpmErrorKind::kBadMaxval);
  }
}

TEST(Ppm, MalformedHeaders) {
  for (const char* header : {"P3\n1 1\n255\n", "P6\n", "P6\n0 1\n255\n", "P6\nx 1\n255\n", "", "P6\n1 1\n255"}) {
    try {
      read_ppm(bytes_of(header));
      FAIL() << "accepted header '" << header << "'";
    } catch (const PpmError& e) {
      EXPECT_EQ(e.kind(), PpmErrorKind::kMalformedHeader) << "header '" << header << "'";
    }
  }
}

TEST(Ppm, RoundTripProperty) {
  Xoshiro256 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const int w = static_cast<int>(rng.between(1, 40));
    const int h = static_cast<int>(rng.between(1, 40));
    const Image img = test::random_image(rng, w, h);
    const Bytes b = write_ppm(img);
    ASSERT_EQ(read_ppm(b), img);
    ASSERT_EQ(write_ppm(read_ppm(b)), b);
  }
}

TEST(Ppm, FileRoundTripAndMissingFile) {
  test::TempDir dir("ppm");
  Xoshiro256 rng(5);
  const Image img = test::random_image(rng, 7, 3);
  write_ppm_file(dir.path() / "a.ppm", img);
  EXPECT_EQ(read_ppm_file(dir.path() / "a.ppm"), img);
  EXPECT_THROW(read_ppm_file(dir.path() / "missing.ppm"), IoError);
  EXPECT_THROW(write_ppm_file(dir.path() / "no" / "such" / "dir.ppm", img), IoError);
}

TEST(Gray, Examples) {
  Image img(3, 1);
  img.at(0, 0) = {255, 255, 255};
  img.at(1, 0) = {0, 0, 0};
  img.at(2, 0) = {255, 0, 0};
  const GrayImage g = rgb_to_gray(img);
  EXPECT_EQ(g.at(0, 0), 255);
  EXPECT_EQ(g.at(1, 0), 0);
  EXPECT_EQ(g.at(2, 0), 76);
}

TEST(Gray, WithinChannelRangeProperty) {
  Xoshiro256 rng(3);
  const Image img = test::random_image(rng, 64, 64);
  const GrayImage g = rgb_to_gray(img);
  for (int y = 0; y < 64; ++y) {
    for (int x = 0; x < 64; ++x) {
      const Rgb p = img.at(x, y);
      EXPECT_GE(g.at(x, y), std::min({p.r, p.g, p.b}));
      EXPECT_LE(g.at(x, y), std::max({p.r, p.g, p.b}));
    }
  }
}

TEST(Gray, ConstantImageIsConstant) {
  const GrayImage g = rgb_to_gray(Image(9, 4, Rgb{12, 200, 91}));
  const auto px = g.pixels();
  EXPECT_TRUE(std::all_of(px.begin(), px.end(), [&](std::uint8_t v) { return v == px[0]; }));
}

TEST(Hsv, Examples) {
  const HsvPixel black = rgb_to_hsv(Rgb{0, 0, 0});
  EXPECT_EQ(black.h, 0.0);
  EXPECT_EQ(black.s, 0.0);
  EXPECT_EQ(black.v, 0.0);
  const HsvPixel red = rgb_to_hsv(Rgb{255, 0, 0});
  EXPECT_DOUBLE_EQ(red.h, 0.0);
  EXPECT_DOUBLE_EQ(red.s, 1.0);
  EXPECT_DOUBLE_EQ(red.v, 1.0);
  const HsvPixel green = rgb_to_hsv(Rgb{0, 255, 0});
  EXPECT_DOUBLE_EQ(green.h, 120.0);
  EXPECT_DOUBLE_EQ(green.s, 1.0);
  EXPECT_DOUBLE_EQ(green.v, 1.0);
  EXPECT_DOUBLE_EQ(rgb_to_hsv(Rgb{0, 0, 255}).h, 240.0);
  EXPECT_DOUBLE_EQ(rgb_to_hsv(Rgb{255, 0, 255}).h, 300.0);
}

TEST(Hsv, GrayHasZeroHue) {
  for (int v : {1, 77, 255}) {
    const auto c = static_cast<std::uint8_t>(v);
    const HsvPixel p = rgb_to_hsv(Rgb{c, c, c});
    EXPECT_EQ(p.h, 0.0);
    EXPECT_EQ(p.s, 0.0);
  }
}

TEST(Hsv, InverseRoundTripProperty) {
  Xoshiro256 rng(17);
  for (int i = 0; i < 20000; ++i) {
    const Rgb px{static_cast<std::uint8_t>(rng.below(256)), static_cast<std::uint8_t>(rng.below(256)),
                 static_cast<std::uint8_t>(rng.below(256))};
    const HsvPixel p = rgb_to_hsv(px);
    ASSERT_GE(p.h, 0.0);
    ASSERT_LT(p.h, 360.0);
    ASSERT_GE(p.s, 0.0);
    ASSERT_LE(p.s, 1.0);
    ASSERT_GE(p.v, 0.0);
    ASSERT_LE(p.v, 1.0);
    const Rgb back = hsv_to_rgb(p);
    ASSERT_LE(std::abs(back.r - px.r), 1);
    ASSERT_LE(std::abs(back.g - px.g), 1);
    ASSERT_LE(std::abs(back.b - px.b), 1);
  }
}

TEST(Hsv, MeanHsvUsesMeanPixel) {
  Image img(2, 1);
  img.at(0, 0) = {200, 0, 0};
  img.at(1, 0) = {100, 0, 0};
  const HsvPixel p = mean_hsv(img);
  EXPECT_DOUBLE_EQ(p.v, 150.0 / 255.0);
  EXPECT_DOUBLE_EQ(p.s, 1.0);
}

}  // namespace
}  // namespace rcc
