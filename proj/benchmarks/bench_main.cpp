#include <benchmark/benchmark.h>

#include "rcc/gradcheck.hpp"
#include "rcc/harness.hpp"
#include "rcc/random.hpp"
#include "rcc/segment.hpp"
#include "rcc/synthgen.hpp"

namespace rcc {
namespace {

Tensor noise(Xoshiro256& rng, Shape shape) {
  Tensor t(std::move(shape));
  for (double& v : t.data()) v = rng.uniform();
  return t;
}

Image scene_image() {
  return render_scene(color_class(4), {50, 40, 90, 70}, 200, 160, standard_illuminants(2.0)[1].spec, 7).image;
}

void BM_Conv1Forward(benchmark::State& state) {
  Xoshiro256 rng(1);
  const Tensor x = noise(rng, {3, 32, 32});
  const NetworkParams p = init_params(0);
  for (auto _ : state) benchmark::DoNotOptimize(conv2d_forward(x, p.conv[0]));
}
BENCHMARK(BM_Conv1Forward);

void BM_Conv2Backward(benchmark::State& state) {
  Xoshiro256 rng(2);
  const Tensor x = noise(rng, {8, 16, 16});
  const Tensor g = noise(rng, {16, 16, 16});
  const NetworkParams p = init_params(0);
  for (auto _ : state) benchmark::DoNotOptimize(conv2d_backward(x, p.conv[1], g));
}
BENCHMARK(BM_Conv2Backward);

void BM_NetworkForward(benchmark::State& state) {
  Xoshiro256 rng(3);
  const Tensor x = noise(rng, {3, 32, 32});
  const NetworkParams p = init_params(0);
  for (auto _ : state) benchmark::DoNotOptimize(network_logits(x, p));
}
BENCHMARK(BM_NetworkForward);

void BM_BatchBackward(benchmark::State& state) {
  Xoshiro256 rng(4);
  std::vector<Sample> batch;
  for (int i = 0; i < state.range(0); ++i) batch.push_back({noise(rng, {3, 32, 32}), i % kNumClasses});
  const NetworkParams p = init_params(0);
  for (auto _ : state) benchmark::DoNotOptimize(network_backward(batch, p));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_BatchBackward)->Arg(1)->Arg(16);

void BM_GaussianBlur(benchmark::State& state) {
  const GrayImage g = rgb_to_gray(scene_image());
  for (auto _ : state) benchmark::DoNotOptimize(gaussian_blur(g, 1.4));
}
BENCHMARK(BM_GaussianBlur);

void BM_AdaptiveThreshold(benchmark::State& state) {
  const GrayImage g = gaussian_blur(rgb_to_gray(scene_image()), 1.4);
  for (auto _ : state) benchmark::DoNotOptimize(adaptive_threshold(g, 11, 2.0));
}
BENCHMARK(BM_AdaptiveThreshold);

void BM_TraceContours(benchmark::State& state) {
  const BinaryMask m = segment_mask(scene_image(), {});
  for (auto _ : state) benchmark::DoNotOptimize(trace_contours(m));
}
BENCHMARK(BM_TraceContours);

void BM_DetectBoundingBox(benchmark::State& state) {
  const Image img = scene_image();
  SegmentConfig cfg;
  cfg.mode = state.range(0) == 0 ? SegmenterMode::kAdaptive : SegmenterMode::kSobel;
  for (auto _ : state) benchmark::DoNotOptimize(detect_bounding_box(img, cfg));
}
BENCHMARK(BM_DetectBoundingBox)->Arg(0)->Arg(1);

void BM_Detect(benchmark::State& state) {
  const Image img = scene_image();
  const NetworkParams p = init_params(0);
  for (auto _ : state) benchmark::DoNotOptimize(detect(img, p));
}
BENCHMARK(BM_Detect);

}  // namespace
}  // namespace rcc

BENCHMARK_MAIN();
