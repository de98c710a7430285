#include "rcc/network.hpp"

#include <algorithm>
#include <cmath>

#include "rcc/random.hpp"

namespace rcc {
namespace {

constexpr std::array<std::size_t, 4> kChannels = {3, 8, 16, 32};
constexpr std::array<std::size_t, 4> kFcWidths = {512, 64, 32, kNumClasses};
constexpr std::size_t kKernel = 3;

template <typename Params, typename Tensors>
Tensors collect(Params& p) {
  Tensors out;
  for (auto& layer : p.conv) {
    out.push_back(&layer.filters);
    out.push_back(&layer.bias);
  }
  for (auto& layer : p.fc) {
    out.push_back(&layer.weights);
    out.push_back(&layer.bias);
  }
  return out;
}

void add_into(Tensor& acc, const Tensor& t) {
  for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += t[i];
}

}  // namespace

std::vector<Tensor*> NetworkParams::tensors() { return collect<NetworkParams, std::vector<Tensor*>>(*this); }

std::vector<const Tensor*> NetworkParams::tensors() const {
  return collect<const NetworkParams, std::vector<const Tensor*>>(*this);
}

std::size_t NetworkParams::parameter_count() const {
  std::size_t n = 0;
  for (const Tensor* t : tensors()) n += t->size();
  return n;
}

NetworkParams NetworkParams::zeros_like() const {
  NetworkParams z;
  for (std::size_t l = 0; l < conv.size(); ++l) {
    z.conv[l] = {Tensor(conv[l].filters.shape()), Tensor(conv[l].bias.shape()), conv[l].padding};
  }
  for (std::size_t l = 0; l < fc.size(); ++l) {
    z.fc[l] = {Tensor(fc[l].weights.shape()), Tensor(fc[l].bias.shape())};
  }
  return z;
}

bool operator==(const NetworkParams& a, const NetworkParams& b) {
  for (std::size_t l = 0; l < a.conv.size(); ++l) {
    if (a.conv[l].padding != b.conv[l].padding) return false;
  }
  const auto ta = a.tensors();
  const auto tb = b.tensors();
  for (std::size_t i = 0; i < ta.size(); ++i) {
    if (!(*ta[i] == *tb[i])) return false;
  }
  return a.class_names == b.class_names;
}

std::vector<std::string> default_class_names() {
  return {"red", "orange", "yellow", "green", "blue", "purple"};
}

std::vector<std::string> tensor_names() {
  return {"conv1.filters", "conv1.bias", "conv2.filters", "conv2.bias", "conv3.filters", "conv3.bias",
          "fc1.weights",   "fc1.bias",   "fc2.weights",   "fc2.bias",   "fc3.weights",   "fc3.bias"};
}

NetworkParams init_params(std::uint64_t seed) {
  NetworkParams p;
  Xoshiro256 rng(seed);
  for (std::size_t l = 0; l < 3; ++l) {
    auto& layer = p.conv[l];
    layer.filters = Tensor({kChannels[l + 1], kChannels[l], kKernel, kKernel});
    layer.bias = Tensor({kChannels[l + 1]});
    layer.padding = 1;
    const double stddev = std::sqrt(2.0 / static_cast<double>(kChannels[l] * kKernel * kKernel));
    for (double& w : layer.filters.data()) w = stddev * rng.normal();
  }
  for (std::size_t l = 0; l < 3; ++l) {
    auto& layer = p.fc[l];
    layer.weights = Tensor({kFcWidths[l + 1], kFcWidths[l]});
    layer.bias = Tensor({kFcWidths[l + 1]});
    const double stddev = std::sqrt(2.0 / static_cast<double>(kFcWidths[l]));
    for (double& w : layer.weights.data()) w = stddev * rng.normal();
  }
  p.class_names = default_class_names();
  return p;
}

Tensor image_to_tensor(const Image& cube) {
  if (cube.width() != kCubeSize || cube.height() != kCubeSize) {
    throw ShapeError("network input must be 32x32, got " + std::to_string(cube.width()) + "x" +
                     std::to_string(cube.height()));
  }
  Tensor t({3, kCubeSize, kCubeSize});
  const std::size_t plane = static_cast<std::size_t>(kCubeSize) * kCubeSize;
  auto px = cube.pixels();
  for (std::size_t i = 0; i < plane; ++i) {
    t[i] = px[i].r / 255.0;
    t[plane + i] = px[i].g / 255.0;
    t[2 * plane + i] = px[i].b / 255.0;
  }
  return t;
}

ForwardTrace forward_trace(const Tensor& input, const NetworkParams& params) {
  ForwardTrace tr;
  tr.input = input;
  const Tensor* x = &tr.input;
  for (std::size_t l = 0; l < 3; ++l) {
    tr.conv_pre[l] = conv2d_forward(*x, params.conv[l]);
    tr.conv_act[l] = relu(tr.conv_pre[l]);
    tr.pooled[l] = maxpool_forward(tr.conv_act[l]);
    x = &tr.pooled[l].output;
  }
  tr.fc_in[0] = x->reshaped({x->size()});
  for (std::size_t l = 0; l < 3; ++l) {
    tr.fc_pre[l] = fc_forward(tr.fc_in[l], params.fc[l]);
    if (l + 1 < 3) tr.fc_in[l + 1] = relu(tr.fc_pre[l]);
  }
  tr.logits = tr.fc_pre[2];
  return tr;
}

const Tensor& stage_input(const ForwardTrace& trace, int stage) {
  switch (stage) {
    case 0: return trace.input;
    case 1: return trace.pooled[0].output;
    case 2: return trace.pooled[1].output;
    case 3:
    case 4:
    case 5: return trace.fc_in[static_cast<std::size_t>(stage - 3)];
    default: throw InvalidParameter("network stage out of range: " + std::to_string(stage));
  }
}

Tensor forward_from(int stage, const Tensor& stage_in, const NetworkParams& params) {
  if (stage < 0 || stage > 5) throw InvalidParameter("network stage out of range: " + std::to_string(stage));
  Tensor x = stage_in;
  for (int l = stage; l < 3; ++l) {
    x = maxpool_forward(relu(conv2d_forward(x, params.conv[static_cast<std::size_t>(l)]))).output;
  }
  if (stage <= 3) x = x.reshaped({x.size()});
  for (int l = std::max(stage - 3, 0); l < 3; ++l) {
    x = fc_forward(x, params.fc[static_cast<std::size_t>(l)]);
    if (l < 2) x = relu(x);
  }
  return x;
}

Tensor network_logits(const Tensor& input, const NetworkParams& params) { return forward_from(0, input, params); }

Tensor network_forward(const Image& cube, const NetworkParams& params) {
  return softmax(network_logits(image_to_tensor(cube), params));
}

BatchGradient network_backward(std::span<const Sample> batch, const NetworkParams& params) {
  if (batch.empty()) throw InvalidParameter("network_backward on an empty batch");
  BatchGradient out{params.zeros_like(), 0.0, 0};

  for (const Sample& sample : batch) {
    const ForwardTrace tr = forward_trace(sample.input, params);
    LossResult loss = softmax_cross_entropy(tr.logits, sample.label);
    out.loss += loss.loss;
    std::size_t best = 0;
    for (std::size_t k = 1; k < tr.logits.size(); ++k) {
      if (tr.logits[k] > tr.logits[best]) best = k;
    }
    if (static_cast<int>(best) == sample.label) ++out.correct;

    Tensor g = std::move(loss.grad);
    for (int l = 2; l >= 0; --l) {
      const auto li = static_cast<std::size_t>(l);
      FcGrads fg = fc_backward(tr.fc_in[li], params.fc[li], g);
      add_into(out.grad.fc[li].weights, fg.weights);
      add_into(out.grad.fc[li].bias, fg.bias);
      g = l > 0 ? relu_backward(tr.fc_pre[li - 1], fg.input) : std::move(fg.input);
    }
    g = g.reshaped(tr.pooled[2].output.shape());
    for (int l = 2; l >= 0; --l) {
      const auto li = static_cast<std::size_t>(l);
      g = maxpool_backward(tr.pooled[li], tr.conv_act[li].shape(), g);
      g = relu_backward(tr.conv_pre[li], g);
      const Tensor& conv_in = l > 0 ? tr.pooled[li - 1].output : tr.input;
      ConvGrads cg = conv2d_backward(conv_in, params.conv[li], g, l > 0);
      add_into(out.grad.conv[li].filters, cg.filters);
      add_into(out.grad.conv[li].bias, cg.bias);
      g = std::move(cg.input);
    }
  }

  const double scale = 1.0 / static_cast<double>(batch.size());
  for (Tensor* t : out.grad.tensors()) {
    for (double& v : t->data()) v *= scale;
  }
  out.loss *= scale;
  return out;
}

double batch_loss(std::span<const Sample> batch, const NetworkParams& params) {
  if (batch.empty()) throw InvalidParameter("batch_loss on an empty batch");
  double total = 0.0;
  for (const Sample& s : batch) total += softmax_cross_entropy(network_logits(s.input, params), s.label).loss;
  return total / static_cast<double>(batch.size());
}

void sgd_step(NetworkParams& params, const NetworkParams& grads, double lr, double momentum,
              NetworkParams& velocity) {
  if (!(lr > 0.0)) throw InvalidParameter("learning rate must be positive");
  if (momentum < 0.0 || momentum >= 1.0) throw InvalidParameter("momentum must be in [0, 1)");
  auto theta = params.tensors();
  auto g = grads.tensors();
  auto v = velocity.tensors();
  for (std::size_t i = 0; i < theta.size(); ++i) {
    if (theta[i]->shape() != g[i]->shape() || theta[i]->shape() != v[i]->shape()) {
      throw ShapeError("sgd_step shape mismatch at tensor " + tensor_names()[i]);
    }
  }
  for (std::size_t i = 0; i < theta.size(); ++i) {
    for (std::size_t k = 0; k < theta[i]->size(); ++k) {
      double& vel = (*v[i])[k];
      vel = momentum * vel - lr * (*g[i])[k];
      (*theta[i])[k] += vel;
    }
  }
}

}  // namespace rcc
