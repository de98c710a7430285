#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "rcc/network.hpp"
#include "rcc/random.hpp"
#include "test_util.hpp"

namespace rcc {
namespace {

Tensor noise_input(Xoshiro256& rng) {
  Tensor t({3, kCubeSize, kCubeSize});
  for (double& v : t.data()) v = rng.uniform();
  return t;
}

// Straightforward forward pass built from the layer functions, independent of
// the network's own trace code.
double reference_loss(const Sample& s, const NetworkParams& p) {
  Tensor x = s.input;
  for (const ConvLayerParams& c : p.conv) x = maxpool_forward(relu(conv2d_forward(x, c))).output;
  x = x.reshaped({x.size()});
  x = relu(fc_forward(x, p.fc[0]));
  x = relu(fc_forward(x, p.fc[1]));
  return softmax_cross_entropy(fc_forward(x, p.fc[2]), s.label).loss;
}

TEST(NetworkParams, ShapesAndCount) {
  const NetworkParams p = init_params(1);
  EXPECT_EQ(p.conv[0].filters.shape(), (Shape{8, 3, 3, 3}));
  EXPECT_EQ(p.conv[1].filters.shape(), (Shape{16, 8, 3, 3}));
  EXPECT_EQ(p.conv[2].filters.shape(), (Shape{32, 16, 3, 3}));
  EXPECT_EQ(p.fc[0].weights.shape(), (Shape{64, 512}));
  EXPECT_EQ(p.fc[1].weights.shape(), (Shape{32, 64}));
  EXPECT_EQ(p.fc[2].weights.shape(), (Shape{6, 32}));
  const std::size_t expected = (8 * 27 + 8) + (16 * 72 + 16) + (32 * 144 + 32) + (64 * 512 + 64) +
                               (32 * 64 + 32) + (6 * 32 + 6);
  EXPECT_EQ(p.parameter_count(), expected);
  EXPECT_EQ(p.tensors().size(), tensor_names().size());
  EXPECT_EQ(tensor_names().front(), "conv1.filters");
  EXPECT_EQ(p.class_names, default_class_names());
}

TEST(NetworkParams, HeInitStatistics) {
  const NetworkParams p = init_params(42);
  const auto tensors = p.tensors();
  for (std::size_t t = 0; t < tensors.size(); t += 2) {
    const Tensor& w = *tensors[t];
    const double fan_in = static_cast<double>(w.size() / w.dim(0));
    const double mean = std::accumulate(w.data().begin(), w.data().end(), 0.0) / static_cast<double>(w.size());
    double var = 0.0;
    for (double v : w.data()) var += (v - mean) * (v - mean);
    const double sd = std::sqrt(var / static_cast<double>(w.size()));
    EXPECT_NEAR(sd, std::sqrt(2.0 / fan_in), 0.1 * std::sqrt(2.0 / fan_in)) << tensor_names()[t];
    for (double b : tensors[t + 1]->data()) EXPECT_EQ(b, 0.0);
  }
}

TEST(NetworkParams, InitIsSeedDeterministic) {
  EXPECT_TRUE(init_params(7) == init_params(7));
  EXPECT_FALSE(init_params(7) == init_params(8));
}

TEST(NetworkParams, ZerosLikeKeepsShapes) {
  const NetworkParams p = init_params(1);
  const NetworkParams z = p.zeros_like();
  const auto a = p.tensors();
  const auto b = z.tensors();
  for (std::size_t t = 0; t < a.size(); ++t) {
    EXPECT_EQ(a[t]->shape(), b[t]->shape());
    for (double v : b[t]->data()) EXPECT_EQ(v, 0.0);
  }
}

TEST(Forward, ZeroParamsGiveUniform) {
  const NetworkParams z = init_params(1).zeros_like();
  Xoshiro256 rng(2);
  const Tensor probs = network_forward(test::random_image(rng, kCubeSize, kCubeSize), z);
  ASSERT_EQ(probs.size(), 6u);
  for (double v : probs.data()) EXPECT_NEAR(v, 1.0 / 6.0, 1e-15);
}

TEST(Forward, ProbabilitiesSumToOne) {
  Xoshiro256 rng(3);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const NetworkParams p = init_params(seed);
    const Tensor probs = network_forward(test::random_image(rng, kCubeSize, kCubeSize), p);
    double sum = 0.0;
    for (double v : probs.data()) {
      EXPECT_GE(v, 0.0);
      sum += v;
    }
    EXPECT_NEAR(sum, 1.0, 1e-9);
  }
}

TEST(Forward, Deterministic) {
  Xoshiro256 rng(4);
  const Image cube = test::random_image(rng, kCubeSize, kCubeSize);
  const NetworkParams p = init_params(5);
  EXPECT_EQ(network_forward(cube, p), network_forward(cube, p));
}

TEST(Forward, WrongCubeSizeThrows) {
  const NetworkParams p = init_params(5);
  EXPECT_THROW(network_forward(Image(31, 32), p), ShapeError);
  EXPECT_THROW(network_logits(Tensor({3, 16, 16}), p), ShapeError);
}

TEST(Forward, ImageToTensorScales) {
  Image img(kCubeSize, kCubeSize, Rgb{255, 0, 51});
  const Tensor t = image_to_tensor(img);
  EXPECT_EQ(t.shape(), (Shape{3, 32, 32}));
  EXPECT_EQ(t.at(0, 5, 7), 1.0);
  EXPECT_EQ(t.at(1, 5, 7), 0.0);
  EXPECT_DOUBLE_EQ(t.at(2, 5, 7), 0.2);
}

TEST(Forward, TraceAgreesWithReference) {
  Xoshiro256 rng(6);
  const NetworkParams p = init_params(9);
  const Sample s{noise_input(rng), 4};
  const ForwardTrace tr = forward_trace(s.input, p);
  EXPECT_NEAR(softmax_cross_entropy(tr.logits, 4).loss, reference_loss(s, p), 1e-12);
  for (int stage = 0; stage < 6; ++stage) {
    const Tensor z = forward_from(stage, stage_input(tr, stage), p);
    for (std::size_t k = 0; k < z.size(); ++k) EXPECT_NEAR(z[k], tr.logits[k], 1e-12) << stage;
  }
}

TEST(Backward, MatchesFiniteDifferenceOfReferenceLoss) {
  Xoshiro256 rng(12);
  NetworkParams p = init_params(12);
  const std::vector<Sample> batch{{noise_input(rng), 1}, {noise_input(rng), 5}};
  const BatchGradient g = network_backward(batch, p);
  auto mean_loss = [&] { return (reference_loss(batch[0], p) + reference_loss(batch[1], p)) / 2.0; };
  EXPECT_NEAR(g.loss, mean_loss(), 1e-12);

  auto params = p.tensors();
  const auto grads = g.grad.tensors();
  const double h = 1e-5;
  for (std::size_t t = 0; t < params.size(); ++t) {
    Tensor& w = *params[t];
    // A spread of entries per tensor; a full sweep lives in the gradient checker.
    for (std::size_t k = 0; k < w.size(); k += 1 + w.size() / 7) {
      const double orig = w[k];
      w[k] = orig + h;
      const double plus = mean_loss();
      w[k] = orig - h;
      const double minus = mean_loss();
      w[k] = orig;
      const double numeric = (plus - minus) / (2 * h);
      EXPECT_NEAR((*grads[t])[k], numeric, 1e-6 * std::max(1.0, std::abs(numeric)))
          << tensor_names()[t] << "[" << k << "]";
    }
  }
}

TEST(Backward, DuplicateSampleKeepsMeanGradient) {
  Xoshiro256 rng(13);
  const NetworkParams p = init_params(13);
  const Sample s{noise_input(rng), 2};
  const std::vector<Sample> one{s};
  const std::vector<Sample> two{s, s};
  const BatchGradient a = network_backward(one, p);
  const BatchGradient b = network_backward(two, p);
  EXPECT_NEAR(a.loss, b.loss, 1e-12);
  const auto ta = a.grad.tensors();
  const auto tb = b.grad.tensors();
  for (std::size_t t = 0; t < ta.size(); ++t) {
    for (std::size_t k = 0; k < ta[t]->size(); ++k) EXPECT_NEAR((*ta[t])[k], (*tb[t])[k], 1e-12);
  }
}

TEST(Backward, DeadReluBlocksGradient) {
  // Strongly negative conv1 biases keep every first-layer unit off, so nothing
  // upstream of the fc head receives gradient.
  NetworkParams p = init_params(14);
  p.conv[0].bias.fill(-100.0);
  Xoshiro256 rng(14);
  const std::vector<Sample> batch{{noise_input(rng), 0}};
  const BatchGradient g = network_backward(batch, p);
  for (const ConvLayerParams* c : {&g.grad.conv[0], &g.grad.conv[1], &g.grad.conv[2]}) {
    for (double v : c->filters.data()) EXPECT_EQ(v, 0.0);
  }
  for (double v : g.grad.fc[0].weights.data()) EXPECT_EQ(v, 0.0);
}

TEST(Backward, CountsCorrect) {
  const NetworkParams z = init_params(1).zeros_like();
  Xoshiro256 rng(15);
  // Uniform output: argmax ties go to class 0.
  const std::vector<Sample> batch{{noise_input(rng), 0}, {noise_input(rng), 3}};
  EXPECT_EQ(network_backward(batch, z).correct, 1);
  EXPECT_NEAR(batch_loss(batch, z), std::log(6.0), 1e-12);
}

TEST(Sgd, PlainStepExample) {
  NetworkParams p = init_params(1).zeros_like();
  NetworkParams g = p.zeros_like();
  NetworkParams v = p.zeros_like();
  p.fc[2].bias[0] = 1.0;
  g.fc[2].bias[0] = 2.0;
  sgd_step(p, g, 0.1, 0.0, v);
  EXPECT_NEAR(p.fc[2].bias[0], 0.8, 1e-15);
}

TEST(Sgd, MomentumRecurrence) {
  NetworkParams p = init_params(1).zeros_like();
  NetworkParams g = p.zeros_like();
  NetworkParams v = p.zeros_like();
  g.fc[2].bias[0] = 1.0;
  sgd_step(p, g, 0.1, 0.9, v);
  EXPECT_NEAR(p.fc[2].bias[0], -0.1, 1e-15);
  sgd_step(p, g, 0.1, 0.9, v);
  EXPECT_NEAR(v.fc[2].bias[0], -0.19, 1e-15);
  EXPECT_NEAR(p.fc[2].bias[0], -0.29, 1e-15);
}

TEST(Sgd, ZeroGradientDecaysVelocity) {
  NetworkParams p = init_params(3);
  const NetworkParams before = p;
  NetworkParams g = p.zeros_like();
  NetworkParams v = p.zeros_like();
  v.conv[1].filters.fill(0.5);
  NetworkParams p_moved = p;
  sgd_step(p_moved, g, 0.1, 0.9, v);
  EXPECT_DOUBLE_EQ(v.conv[1].filters[0], 0.45);
  EXPECT_DOUBLE_EQ(v.conv[0].filters[0], 0.0);

  // With no stored velocity the parameters stay put.
  NetworkParams v0 = p.zeros_like();
  sgd_step(p, g, 0.1, 0.9, v0);
  EXPECT_TRUE(p == before);
}

TEST(Sgd, SmallStepDoesNotIncreaseLoss) {
  Xoshiro256 rng(16);
  std::vector<Sample> batch;
  for (int i = 0; i < 4; ++i) batch.push_back({noise_input(rng), i});
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    NetworkParams p = init_params(seed);
    NetworkParams v = p.zeros_like();
    const BatchGradient g = network_backward(batch, p);
    sgd_step(p, g.grad, 1e-4, 0.0, v);
    EXPECT_LE(batch_loss(batch, p), g.loss + 1e-9);
  }
}

}  // namespace
}  // namespace rcc
