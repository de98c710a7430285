#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "rcc/image.hpp"
#include "rcc/layers.hpp"

namespace rcc {

inline constexpr int kNumClasses = 6;
inline constexpr int kCubeSize = 32;

/// conv(3->8) pool conv(8->16) pool conv(16->32) pool, then fc 512->64->32->6.
/// All convolutions are 3x3 with padding 1; pools are 2x2.
struct NetworkParams {
  std::array<ConvLayerParams, 3> conv;
  std::array<FcLayerParams, 3> fc;
  std::vector<std::string> class_names;

  /// Parameter tensors in canonical order: each layer's weights then bias,
  /// conv1..conv3 then fc1..fc3.
  std::vector<Tensor*> tensors();
  std::vector<const Tensor*> tensors() const;

  std::size_t parameter_count() const;

  /// Zero tensors with this network's shapes (gradient / velocity storage).
  NetworkParams zeros_like() const;

  friend bool operator==(const NetworkParams& a, const NetworkParams& b);
};

std::vector<std::string> default_class_names();

/// Names of the tensors returned by NetworkParams::tensors(), e.g. "conv1.filters".
std::vector<std::string> tensor_names();

/// He-normal weights (std = sqrt(2 / fan_in)) drawn from xoshiro256** in
/// canonical tensor order; biases zero.
NetworkParams init_params(std::uint64_t seed);

/// (3, 32, 32) tensor with channels scaled to [0, 1].
Tensor image_to_tensor(const Image& cube);

struct Sample {
  Tensor input;  // (3, 32, 32)
  int label = 0;
};

/// Every intermediate of one forward pass, kept for backprop.
struct ForwardTrace {
  Tensor input;
  std::array<Tensor, 3> conv_pre;
  std::array<Tensor, 3> conv_act;
  std::array<PoolResult, 3> pooled;
  std::array<Tensor, 3> fc_in;
  std::array<Tensor, 3> fc_pre;
  Tensor logits;
};

ForwardTrace forward_trace(const Tensor& input, const NetworkParams& params);

/// Logits computed from layer `stage` (0..2 conv, 3..5 fc) onward, given
/// that stage's input. Used to re-run only the tail of the network.
Tensor forward_from(int stage, const Tensor& stage_input, const NetworkParams& params);

/// Input of layer `stage` inside a trace.
const Tensor& stage_input(const ForwardTrace& trace, int stage);

Tensor network_logits(const Tensor& input, const NetworkParams& params);

/// Class probabilities for a 32x32 cube.
Tensor network_forward(const Image& cube, const NetworkParams& params);

struct BatchGradient {
  NetworkParams grad;  // mean over the batch
  double loss = 0.0;   // mean loss
  int correct = 0;
};

/// Mean softmax cross-entropy gradient over the batch. Per-sample gradients
/// are summed in sample order.
BatchGradient network_backward(std::span<const Sample> batch, const NetworkParams& params);

/// Mean loss only.
double batch_loss(std::span<const Sample> batch, const NetworkParams& params);

/// v <- momentum * v - lr * g;  theta <- theta + v
void sgd_step(NetworkParams& params, const NetworkParams& grads, double lr, double momentum,
              NetworkParams& velocity);

}  // namespace rcc
