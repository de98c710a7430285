#include "rcc/gradcheck.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>

namespace rcc {
namespace {

// The perturbed passes are evaluated with error-free transformations
// (Dekker products, Knuth sums), so every layer output is the double nearest
// its exact value. With ordinary summation the loss carries ~10 ulp of noise,
// which a 1e-5 step turns into ~1e-10 of gradient error.

constexpr double kSplitter = 134217729.0;  // 2^27 + 1

struct SplitTensor {
  std::vector<double> val, hi, lo;
};

SplitTensor split(const Tensor& t) {
  SplitTensor s{{t.data().begin(), t.data().end()}, std::vector<double>(t.size()), std::vector<double>(t.size())};
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double c = kSplitter * s.val[i];
    s.hi[i] = c - (c - s.val[i]);
    s.lo[i] = s.val[i] - s.hi[i];
  }
  return s;
}

// Running sum s + c of exact products.
struct Accumulator {
  double s = 0.0;
  double c = 0.0;

  void add_product(double a, double ah, double al, double b, double bh, double bl) {
    const double p = a * b;
    const double e = ((ah * bh - p) + ah * bl + al * bh) + al * bl;
    const double t = s + p;
    const double z = t - s;
    c += ((s - (t - z)) + (p - z)) + e;
    s = t;
  }
  double value() const { return s + c; }
};

void split_scalar(double a, double& hi, double& lo) {
  const double c = kSplitter * a;
  hi = c - (c - a);
  lo = a - hi;
}

// One output channel of a stride-1 convolution, written to `out_plane`.
void conv_channel(const SplitTensor& x, const Shape& in_shape, const ConvLayerParams& p, std::size_t o,
                  double* out_plane) {
  const std::size_t in_ch = in_shape[0], height = in_shape[1], width = in_shape[2];
  const std::size_t kh = p.filters.dim(2), kw = p.filters.dim(3);
  const auto pad = static_cast<std::ptrdiff_t>(p.padding);
  const std::size_t out_h = height + 2 * p.padding - kh + 1, out_w = width + 2 * p.padding - kw + 1;

  std::vector<Accumulator> acc(out_h * out_w, Accumulator{p.bias[o], 0.0});
  for (std::size_t c = 0; c < in_ch; ++c) {
    for (std::size_t m = 0; m < kh; ++m) {
      for (std::size_t n = 0; n < kw; ++n) {
        const double w = p.filters[((o * in_ch + c) * kh + m) * kw + n];
        double wh, wl;
        split_scalar(w, wh, wl);
        for (std::size_t i = 0; i < out_h; ++i) {
          const std::ptrdiff_t r = static_cast<std::ptrdiff_t>(i + m) - pad;
          if (r < 0 || r >= static_cast<std::ptrdiff_t>(height)) continue;
          for (std::size_t j = 0; j < out_w; ++j) {
            const std::ptrdiff_t col = static_cast<std::ptrdiff_t>(j + n) - pad;
            if (col < 0 || col >= static_cast<std::ptrdiff_t>(width)) continue;
            const std::size_t k = (c * height + static_cast<std::size_t>(r)) * width + static_cast<std::size_t>(col);
            acc[i * out_w + j].add_product(w, wh, wl, x.val[k], x.hi[k], x.lo[k]);
          }
        }
      }
    }
  }
  for (std::size_t k = 0; k < acc.size(); ++k) out_plane[k] = acc[k].value();
}

double fc_unit(const SplitTensor& x, const FcLayerParams& p, std::size_t o) {
  const std::size_t in = p.weights.dim(1);
  Accumulator acc{p.bias[o], 0.0};
  for (std::size_t i = 0; i < in; ++i) {
    const double w = p.weights[o * in + i];
    double wh, wl;
    split_scalar(w, wh, wl);
    acc.add_product(w, wh, wl, x.val[i], x.hi[i], x.lo[i]);
  }
  return acc.value();
}

// Pre-activation of layer `layer` (0..2 conv, 3..5 fc).
Tensor layer_pre(int layer, const Tensor& in, const SplitTensor& in_split, const NetworkParams& params) {
  if (layer < 3) {
    const ConvLayerParams& p = params.conv[static_cast<std::size_t>(layer)];
    const std::size_t out_h = in.dim(1) + 2 * static_cast<std::size_t>(p.padding) - p.filters.dim(2) + 1;
    const std::size_t out_w = in.dim(2) + 2 * static_cast<std::size_t>(p.padding) - p.filters.dim(3) + 1;
    Tensor out({p.filters.dim(0), out_h, out_w});
    for (std::size_t o = 0; o < out.dim(0); ++o) {
      conv_channel(in_split, in.shape(), p, o, out.raw() + o * out_h * out_w);
    }
    return out;
  }
  const FcLayerParams& p = params.fc[static_cast<std::size_t>(layer - 3)];
  Tensor out({p.weights.dim(0)});
  for (std::size_t o = 0; o < out.size(); ++o) out[o] = fc_unit(in_split, p, o);
  return out;
}

// Which side of every ReLU and pooling choice a pass took.
struct Branches {
  std::vector<bool> relu_on;
  std::vector<std::size_t> pool_argmax;

  bool operator==(const Branches&) const = default;
};

// Output of layer `layer` given its pre-activation.
Tensor activate(int layer, const Tensor& pre, Branches& branches) {
  if (layer == 5) return pre;
  for (double v : pre.data()) branches.relu_on.push_back(v > 0.0);
  Tensor act = relu(pre);
  if (layer > 2) return act;
  PoolResult pooled = maxpool_forward(act);
  branches.pool_argmax.insert(branches.pool_argmax.end(), pooled.argmax.begin(), pooled.argmax.end());
  return layer == 2 ? pooled.output.reshaped({pooled.output.size()}) : std::move(pooled.output);
}

struct Pass {
  std::array<Tensor, 6> in;
  std::array<SplitTensor, 6> in_split;
  std::array<Tensor, 6> pre;
};

Pass full_pass(const Tensor& input, const NetworkParams& params) {
  Pass pass;
  Tensor x = input;
  Branches unused;
  for (int l = 0; l < 6; ++l) {
    const auto li = static_cast<std::size_t>(l);
    pass.in_split[li] = split(x);
    pass.pre[li] = layer_pre(l, x, pass.in_split[li], params);
    pass.in[li] = std::move(x);
    x = activate(l, pass.pre[li], unused);
  }
  return pass;
}

// Logits from a (possibly modified) pre-activation of layer `layer` onward.
Tensor finish(int layer, const Tensor& pre, const NetworkParams& params, Branches& branches) {
  branches.relu_on.clear();
  branches.pool_argmax.clear();
  Tensor x = activate(layer, pre, branches);
  for (int l = layer + 1; l < 6; ++l) x = activate(l, layer_pre(l, x, split(x), params), branches);
  return x;
}

// L(z) - L(z0) for softmax cross-entropy, computed without subtracting two
// nearly equal losses.
double loss_change(const Tensor& z0, const Tensor& z, int label) {
  const Tensor p = softmax(z0);
  double acc = 0.0;
  for (std::size_t k = 0; k < z.size(); ++k) acc += p[k] * std::expm1(z[k] - z0[k]);
  const auto y = static_cast<std::size_t>(label);
  return std::log1p(acc) - (z[y] - z0[y]);
}

}  // namespace

bool GradCheckReport::passed() const {
  return !tensors.empty() && std::all_of(tensors.begin(), tensors.end(), [](const TensorCheck& t) {
    return t.failures == 0 && t.kinks < t.checked;
  });
}

double relative_error(double analytic, double numeric, double floor) {
  const double scale = std::max({std::abs(analytic), std::abs(numeric), floor});
  return std::abs(analytic - numeric) / scale;
}

GradCheckReport gradient_check(std::span<const Sample> batch, const NetworkParams& params,
                               const GradCheckConfig& cfg) {
  if (batch.empty()) throw InvalidParameter("gradient check on an empty batch");
  const BatchGradient analytic = network_backward(batch, params);

  std::vector<Pass> base;
  std::vector<Tensor> base_logits;
  std::array<std::vector<Branches>, 6> base_branches;
  for (const Sample& s : batch) {
    base.push_back(full_pass(s.input, params));
    for (int l = 0; l < 6; ++l) {
      Branches br;
      Tensor z = finish(l, base.back().pre[static_cast<std::size_t>(l)], params, br);
      if (l == 0) base_logits.push_back(std::move(z));
      base_branches[static_cast<std::size_t>(l)].push_back(std::move(br));
    }
  }

  NetworkParams probe = params;
  auto probe_tensors = probe.tensors();
  const auto grad_tensors = analytic.grad.tensors();
  const auto names = tensor_names();

  GradCheckReport report;
  Branches seen;
  for (std::size_t t = 0; t < probe_tensors.size(); ++t) {
    const int layer = static_cast<int>(t / 2);
    const auto li = static_cast<std::size_t>(layer);
    const bool is_bias = t % 2 == 1;
    Tensor& target = *probe_tensors[t];
    // Output unit (conv channel or fc neuron) that entry k feeds.
    const std::size_t unit_stride = is_bias ? 1 : target.size() / target.dim(0);

    // Mean loss change over the batch, or nullopt if any branch flipped.
    auto change_at = [&](std::size_t k) -> std::optional<double> {
      const std::size_t unit = k / unit_stride;
      double total = 0.0;
      for (std::size_t b = 0; b < batch.size(); ++b) {
        Tensor pre = base[b].pre[li];
        if (layer < 3) {
          const std::size_t plane = pre.dim(1) * pre.dim(2);
          conv_channel(base[b].in_split[li], base[b].in[li].shape(), probe.conv[li], unit, pre.raw() + unit * plane);
        } else {
          pre[unit] = fc_unit(base[b].in_split[li], probe.fc[li - 3], unit);
        }
        const Tensor z = finish(layer, pre, probe, seen);
        if (!(seen == base_branches[li][b])) return std::nullopt;
        total += loss_change(base_logits[b], z, batch[b].label);
      }
      return total / static_cast<double>(batch.size());
    };

    TensorCheck check{names[t], 0, 0, 0, 0.0};
    for (std::size_t k = 0; k < target.size(); ++k) {
      const double original = target[k];
      const double up = original + cfg.step;
      const double down = original - cfg.step;
      target[k] = up;
      const auto plus = change_at(k);
      target[k] = down;
      const auto minus = plus ? change_at(k) : std::nullopt;
      target[k] = original;

      ++check.checked;
      if (!plus || !minus) {
        ++check.kinks;
        continue;
      }
      const double numeric = (*plus - *minus) / (up - down);
      const double err = relative_error((*grad_tensors[t])[k], numeric, cfg.scale_floor);
      check.max_rel_error = std::max(check.max_rel_error, err);
      if (!(err < cfg.tolerance)) ++check.failures;
    }
    report.tensors.push_back(check);
  }
  return report;
}

}  // namespace rcc
