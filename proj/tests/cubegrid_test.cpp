#include <gtest/gtest.h>

#include <set>
#include <vector>

#include "rcc/cubegrid.hpp"
#include "test_util.hpp"

namespace rcc {
namespace {

// Pixel (x, y) encodes its own coordinates so copies can be traced back.
Image coordinate_image(int w, int h) {
  Image img(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) img.at(x, y) = {static_cast<std::uint8_t>(x), static_cast<std::uint8_t>(y), 7};
  }
  return img;
}

std::vector<double> one_hot_ish(int label, double p) {
  std::vector<double> v(6, (1.0 - p) / 5.0);
  v[static_cast<std::size_t>(label)] = p;
  return v;
}

TEST(Crop, Examples) {
  const Image img = coordinate_image(10, 8);
  EXPECT_EQ(crop(img, {0, 0, 10, 8}), img);
  const Image one = crop(img, {2, 3, 1, 1});
  ASSERT_EQ(one.width(), 1);
  EXPECT_EQ(one.at(0, 0), img.at(2, 3));
  const Image c = crop(img, {4, 5, 3, 2});
  for (int y = 0; y < 2; ++y) {
    for (int x = 0; x < 3; ++x) EXPECT_EQ(c.at(x, y), img.at(4 + x, 5 + y));
  }
}

TEST(Crop, OutOfBounds) {
  const Image img(10, 8);
  EXPECT_THROW(crop(img, {8, 0, 3, 1}), InvalidParameter);
  EXPECT_THROW(crop(img, {-1, 0, 3, 1}), InvalidParameter);
  EXPECT_THROW(crop(img, {0, 7, 1, 2}), InvalidParameter);
  EXPECT_THROW(crop(img, {0, 0, 0, 1}), InvalidParameter);
}

TEST(ResizeNearest, Examples) {
  Xoshiro256 rng(1);
  const Image img = test::random_image(rng, 5, 4);
  EXPECT_EQ(resize_nearest(img, 5, 4), img);

  const Image dot(1, 1, Rgb{9, 8, 7});
  const Image big = resize_nearest(dot, 6, 6);
  for (const Rgb& px : big.pixels()) EXPECT_EQ(px, (Rgb{9, 8, 7}));

  Image checker(2, 2);
  checker.at(0, 0) = checker.at(1, 1) = {255, 255, 255};
  const Image up = resize_nearest(checker, 4, 4);
  for (int y = 0; y < 4; ++y) {
    for (int x = 0; x < 4; ++x) EXPECT_EQ(up.at(x, y), checker.at(x / 2, y / 2));
  }
  EXPECT_THROW(resize_nearest(img, 0, 3), InvalidParameter);
}

TEST(ResizeNearest, FollowsIndexFormula) {
  const Image img = coordinate_image(7, 5);
  const Image out = resize_nearest(img, 11, 3);
  for (int y = 0; y < 3; ++y) {
    for (int x = 0; x < 11; ++x) {
      const int sx = static_cast<int>((x + 0.5) * 7 / 11);
      const int sy = static_cast<int>((y + 0.5) * 5 / 3);
      EXPECT_EQ(out.at(x, y), img.at(sx, sy));
    }
  }
}

TEST(WorkingCrop, UpscalesSmallBoxes) {
  const Image img = coordinate_image(200, 150);
  EXPECT_EQ(working_crop(img, {0, 0, 120, 100}, {}).width(), 120);
  const Image a = working_crop(img, {0, 0, 48, 60}, {});
  EXPECT_EQ(a.width(), 96);
  EXPECT_EQ(a.height(), 120);
  const Image b = working_crop(img, {0, 0, 150, 20}, {});
  EXPECT_EQ(b.height(), 96);
  EXPECT_EQ(b.width(), 720);
  const Image c = working_crop(img, {0, 0, 10, 40}, {});
  EXPECT_EQ(c.width(), 96);
  EXPECT_EQ(c.height(), 384);
}

TEST(ExtractCubes, Centers96) {
  const Image img = coordinate_image(100, 100);
  const CubeGrid g = extract_color_cubes(img, {2, 3, 96, 96});
  ASSERT_EQ(g.centers.size(), 9u);
  const int expected[] = {16, 48, 80};
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      EXPECT_EQ(g.centers[static_cast<std::size_t>(3 * i + j)], (Point{expected[i], expected[j]}));
    }
  }
  // i-major: the second cube is one step down, not across.
  EXPECT_EQ(g.cubes[1].at(0, 0), img.at(2, 3 + 32));
  EXPECT_EQ(g.cubes[3].at(0, 0), img.at(2 + 32, 3));
}

TEST(ExtractCubes, Centers192AreDisjoint) {
  const CubeGrid g = extract_color_cubes(coordinate_image(192, 192), {0, 0, 192, 192});
  std::set<int> xs, ys;
  for (const Point& c : g.centers) {
    xs.insert(c.col);
    ys.insert(c.row);
  }
  EXPECT_EQ(xs, (std::set<int>{32, 96, 160}));
  EXPECT_EQ(ys, (std::set<int>{32, 96, 160}));
}

TEST(ExtractCubes, PartitionsA96Crop) {
  Image img(96, 96);
  for (int y = 0; y < 96; ++y) {
    for (int x = 0; x < 96; ++x) img.at(x, y) = {static_cast<std::uint8_t>(x), static_cast<std::uint8_t>(y), 0};
  }
  const CubeGrid g = extract_color_cubes(img, {0, 0, 96, 96});
  std::vector<int> hits(96 * 96, 0);
  for (const Image& cube : g.cubes) {
    for (const Rgb& px : cube.pixels()) ++hits[static_cast<std::size_t>(px.g * 96 + px.r)];
  }
  for (int h : hits) EXPECT_EQ(h, 1);
}

TEST(ExtractCubes, AlwaysNineInBoundsCubes) {
  Xoshiro256 rng(66);
  const Image img = coordinate_image(240, 240);
  for (int trial = 0; trial < 300; ++trial) {
    const int size = 2 * static_cast<int>(rng.between(1, 24));
    const int w = static_cast<int>(rng.between(1, 240));
    const int h = static_cast<int>(rng.between(1, 240));
    const BoundRect r{static_cast<int>(rng.below(static_cast<std::uint64_t>(241 - w))),
                      static_cast<int>(rng.below(static_cast<std::uint64_t>(241 - h))), w, h};
    const CubeGrid g = extract_color_cubes(img, r, {size});
    ASSERT_EQ(g.cubes.size(), 9u);
    ASSERT_GE(g.work_width, 3 * size);
    ASSERT_GE(g.work_height, 3 * size);
    for (std::size_t k = 0; k < 9; ++k) {
      ASSERT_EQ(g.cubes[k].width(), size);
      ASSERT_EQ(g.cubes[k].height(), size);
      const Point c = g.centers[k];
      ASSERT_GE(c.col - size / 2, 0);
      ASSERT_GE(c.row - size / 2, 0);
      ASSERT_LE(c.col + size / 2, g.work_width);
      ASSERT_LE(c.row + size / 2, g.work_height);
    }
  }
}

TEST(ExtractCubes, GeometryIgnoresContent) {
  Xoshiro256 rng(2);
  const Image a = test::random_image(rng, 130, 90);
  const Image b = test::random_image(rng, 130, 90);
  const CubeGrid ga = extract_color_cubes(a, {5, 7, 70, 50});
  const CubeGrid gb = extract_color_cubes(b, {5, 7, 70, 50});
  EXPECT_EQ(ga.centers, gb.centers);
  EXPECT_EQ(ga.work_width, gb.work_width);
  EXPECT_EQ(ga.work_height, gb.work_height);
}

TEST(ExtractCubes, ConstantCropGivesIdenticalCubes) {
  const CubeGrid g = extract_color_cubes(Image(120, 100, Rgb{30, 80, 220}), {10, 10, 100, 80});
  for (const Image& cube : g.cubes) EXPECT_EQ(cube, g.cubes[0]);
  EXPECT_EQ(g.cubes[0].at(5, 5), (Rgb{30, 80, 220}));
}

TEST(ExtractCubes, RejectsOddOrEmptySize) {
  const Image img(100, 100);
  EXPECT_THROW(extract_color_cubes(img, {0, 0, 96, 96}, {31}), InvalidParameter);
  EXPECT_THROW(extract_color_cubes(img, {0, 0, 96, 96}, {0}), InvalidParameter);
  EXPECT_THROW(extract_color_cubes(img, {50, 50, 96, 96}), InvalidParameter);
}

TEST(AggregateVotes, Unanimous) {
  const std::vector<int> labels(9, 2);
  const std::vector<std::vector<double>> conf(9, one_hot_ish(2, 0.8));
  const Vote v = aggregate_votes(labels, conf);
  EXPECT_EQ(v.label, 2);
  EXPECT_DOUBLE_EQ(v.confidence, 0.8);
}

TEST(AggregateVotes, StrictMajority) {
  std::vector<int> labels = {0, 0, 0, 0, 0, 4, 4, 4, 4};
  std::vector<std::vector<double>> conf;
  for (int l : labels) conf.push_back(one_hot_ish(l, l == 0 ? 0.4 : 0.99));
  EXPECT_EQ(aggregate_votes(labels, conf).label, 0);
}

TEST(AggregateVotes, TieBrokenByMeanProbability) {
  const std::vector<int> labels = {4, 0, 4, 0, 3, 4, 0, 4, 0};
  std::vector<std::vector<double>> conf;
  for (int l : labels) conf.push_back(one_hot_ish(l, l == 0 ? 0.9 : (l == 4 ? 0.6 : 0.7)));
  const Vote v = aggregate_votes(labels, conf);
  EXPECT_EQ(v.label, 0);
  EXPECT_NEAR(v.confidence, 0.9, 1e-12);
}

TEST(AggregateVotes, FullTieFallsBackToLowerIndex) {
  const std::vector<int> labels = {5, 1, 2, 5, 1, 2, 5, 1, 2};
  const std::vector<std::vector<double>> conf(9, std::vector<double>(6, 1.0 / 6.0));
  EXPECT_EQ(aggregate_votes(labels, conf).label, 1);
}

TEST(AggregateVotes, WinnerIsAlwaysAnInputLabel) {
  Xoshiro256 rng(90);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<int> labels;
    std::vector<std::vector<double>> conf;
    for (int k = 0; k < 9; ++k) {
      labels.push_back(static_cast<int>(rng.below(6)));
      conf.push_back(one_hot_ish(labels.back(), rng.uniform(0.2, 1.0)));
    }
    const Vote v = aggregate_votes(labels, conf);
    ASSERT_NE(std::find(labels.begin(), labels.end(), v.label), labels.end());
  }
}

TEST(AggregateVotes, RequiresNinePredictions) {
  const std::vector<int> labels(8, 1);
  const std::vector<std::vector<double>> conf(8, one_hot_ish(1, 0.5));
  EXPECT_THROW(aggregate_votes(labels, conf), InvalidParameter);
}

}  // namespace
}  // namespace rcc
