#include "rcc/layers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace rcc {
namespace {

struct ConvGeometry {
  std::size_t in_ch, height, width;
  std::size_t out_ch, kh, kw;
  std::ptrdiff_t pad;
  std::size_t out_h, out_w;
};

ConvGeometry conv_geometry(const Tensor& x, const ConvLayerParams& p) {
  if (x.rank() != 3 || p.filters.rank() != 4 || p.bias.rank() != 1) {
    throw ShapeError("conv2d expects x (C,H,W), filters (O,C,M,N), bias (O); got " + to_string(x.shape()) +
                     ", " + to_string(p.filters.shape()) + ", " + to_string(p.bias.shape()));
  }
  ConvGeometry g{x.dim(0), x.dim(1), x.dim(2), p.filters.dim(0), p.filters.dim(2), p.filters.dim(3),
                 p.padding, 0, 0};
  if (p.filters.dim(1) != g.in_ch || p.bias.dim(0) != g.out_ch) {
    throw ShapeError("conv2d channel mismatch: x " + to_string(x.shape()) + ", filters " +
                     to_string(p.filters.shape()));
  }
  if (p.padding < 0) throw ShapeError("conv2d padding must be non-negative");
  const auto padded_h = static_cast<std::ptrdiff_t>(g.height) + 2 * g.pad;
  const auto padded_w = static_cast<std::ptrdiff_t>(g.width) + 2 * g.pad;
  if (padded_h < static_cast<std::ptrdiff_t>(g.kh) || padded_w < static_cast<std::ptrdiff_t>(g.kw)) {
    throw ShapeError("conv2d filter larger than padded input");
  }
  g.out_h = static_cast<std::size_t>(padded_h) - g.kh + 1;
  g.out_w = static_cast<std::size_t>(padded_w) - g.kw + 1;
  return g;
}

// Output columns j for which input column j + n - pad lies inside [0, width).
struct Span {
  std::size_t begin, end;
};

Span valid_range(std::ptrdiff_t offset, std::size_t out_len, std::size_t in_len) {
  const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, -offset);
  const std::ptrdiff_t hi =
      std::min<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(out_len), static_cast<std::ptrdiff_t>(in_len) - offset);
  if (hi <= lo) return {0, 0};
  return {static_cast<std::size_t>(lo), static_cast<std::size_t>(hi)};
}

}  // namespace

Tensor conv2d_forward(const Tensor& x, const ConvLayerParams& p) {
  const ConvGeometry g = conv_geometry(x, p);
  Tensor out({g.out_ch, g.out_h, g.out_w});
  const std::size_t plane = g.out_h * g.out_w;

  for (std::size_t o = 0; o < g.out_ch; ++o) {
    double* out_plane = out.raw() + o * plane;
    std::fill(out_plane, out_plane + plane, p.bias[o]);
    for (std::size_t c = 0; c < g.in_ch; ++c) {
      const double* in_plane = x.raw() + c * g.height * g.width;
      const double* w = p.filters.raw() + ((o * g.in_ch + c) * g.kh) * g.kw;
      for (std::size_t m = 0; m < g.kh; ++m) {
        const std::ptrdiff_t row_off = static_cast<std::ptrdiff_t>(m) - g.pad;
        const Span rows = valid_range(row_off, g.out_h, g.height);
        for (std::size_t n = 0; n < g.kw; ++n) {
          const double weight = w[m * g.kw + n];
          const std::ptrdiff_t col_off = static_cast<std::ptrdiff_t>(n) - g.pad;
          const Span cols = valid_range(col_off, g.out_w, g.width);
          for (std::size_t i = rows.begin; i < rows.end; ++i) {
            double* dst = out_plane + i * g.out_w;
            const double* src = in_plane + (i + row_off) * g.width + col_off;
            for (std::size_t j = cols.begin; j < cols.end; ++j) dst[j] += weight * src[j];
          }
        }
      }
    }
  }
  return out;
}

ConvGrads conv2d_backward(const Tensor& x, const ConvLayerParams& p, const Tensor& grad_out,
                          bool need_input_grad) {
  const ConvGeometry g = conv_geometry(x, p);
  if (grad_out.shape() != Shape{g.out_ch, g.out_h, g.out_w}) {
    throw ShapeError("conv2d_backward grad shape " + to_string(grad_out.shape()) + " mismatches output");
  }
  ConvGrads grads;
  grads.filters = Tensor(p.filters.shape());
  grads.bias = Tensor(p.bias.shape());
  if (need_input_grad) grads.input = Tensor(x.shape());
  const std::size_t plane = g.out_h * g.out_w;

  for (std::size_t o = 0; o < g.out_ch; ++o) {
    const double* g_plane = grad_out.raw() + o * plane;
    double bias_acc = 0.0;
    for (std::size_t k = 0; k < plane; ++k) bias_acc += g_plane[k];
    grads.bias[o] = bias_acc;

    for (std::size_t c = 0; c < g.in_ch; ++c) {
      const double* in_plane = x.raw() + c * g.height * g.width;
      double* gin_plane = need_input_grad ? grads.input.raw() + c * g.height * g.width : nullptr;
      const std::size_t w_base = ((o * g.in_ch + c) * g.kh) * g.kw;
      for (std::size_t m = 0; m < g.kh; ++m) {
        const std::ptrdiff_t row_off = static_cast<std::ptrdiff_t>(m) - g.pad;
        const Span rows = valid_range(row_off, g.out_h, g.height);
        for (std::size_t n = 0; n < g.kw; ++n) {
          const std::ptrdiff_t col_off = static_cast<std::ptrdiff_t>(n) - g.pad;
          const Span cols = valid_range(col_off, g.out_w, g.width);
          const double weight = p.filters[w_base + m * g.kw + n];
          double acc = 0.0;
          for (std::size_t i = rows.begin; i < rows.end; ++i) {
            const double* go = g_plane + i * g.out_w;
            const double* src = in_plane + (i + row_off) * g.width + col_off;
            for (std::size_t j = cols.begin; j < cols.end; ++j) acc += go[j] * src[j];
            if (gin_plane) {
              double* dst = gin_plane + (i + row_off) * g.width + col_off;
              for (std::size_t j = cols.begin; j < cols.end; ++j) dst[j] += weight * go[j];
            }
          }
          grads.filters[w_base + m * g.kw + n] = acc;
        }
      }
    }
  }
  return grads;
}

Tensor relu(const Tensor& x) {
  Tensor out = x;
  for (double& v : out.data()) v = v > 0.0 ? v : 0.0;
  return out;
}

Tensor relu_backward(const Tensor& pre_activation, const Tensor& grad_out) {
  if (pre_activation.shape() != grad_out.shape()) throw ShapeError("relu_backward shape mismatch");
  Tensor out(grad_out.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = pre_activation[i] > 0.0 ? grad_out[i] : 0.0;
  return out;
}

PoolResult maxpool_forward(const Tensor& x, const PoolSpec& spec) {
  if (spec.k < 1) throw ShapeError("pool size must be >= 1");
  if (x.rank() != 3) throw ShapeError("maxpool expects (C,H,W), got " + to_string(x.shape()));
  const std::size_t k = static_cast<std::size_t>(spec.k);
  const std::size_t channels = x.dim(0), height = x.dim(1), width = x.dim(2);
  if (height % k != 0 || width % k != 0) {
    throw ShapeError("maxpool: " + to_string(x.shape()) + " not divisible by " + std::to_string(k));
  }
  const std::size_t oh = height / k, ow = width / k;
  PoolResult result{Tensor({channels, oh, ow}), std::vector<std::size_t>(channels * oh * ow)};

  std::size_t out_idx = 0;
  for (std::size_t c = 0; c < channels; ++c) {
    for (std::size_t i = 0; i < oh; ++i) {
      for (std::size_t j = 0; j < ow; ++j, ++out_idx) {
        double best = -std::numeric_limits<double>::infinity();
        std::size_t best_idx = (c * height + i * k) * width + j * k;
        for (std::size_t m = 0; m < k; ++m) {
          for (std::size_t n = 0; n < k; ++n) {
            const std::size_t idx = (c * height + i * k + m) * width + j * k + n;
            if (x[idx] > best) {
              best = x[idx];
              best_idx = idx;
            }
          }
        }
        result.output[out_idx] = x[best_idx];
        result.argmax[out_idx] = best_idx;
      }
    }
  }
  return result;
}

Tensor maxpool_backward(const PoolResult& forward, const Shape& input_shape, const Tensor& grad_out) {
  if (grad_out.shape() != forward.output.shape()) throw ShapeError("maxpool_backward shape mismatch");
  Tensor grad_in(input_shape);
  for (std::size_t i = 0; i < grad_out.size(); ++i) grad_in[forward.argmax[i]] += grad_out[i];
  return grad_in;
}

Tensor fc_forward(const Tensor& x, const FcLayerParams& p) {
  if (p.weights.rank() != 2 || p.bias.rank() != 1 || p.weights.dim(1) != x.size() ||
      p.bias.dim(0) != p.weights.dim(0)) {
    throw ShapeError("fc: input of " + std::to_string(x.size()) + " against weights " +
                     to_string(p.weights.shape()) + ", bias " + to_string(p.bias.shape()));
  }
  const std::size_t out_n = p.weights.dim(0), in_n = p.weights.dim(1);
  Tensor out({out_n});
  for (std::size_t o = 0; o < out_n; ++o) {
    const double* row = p.weights.raw() + o * in_n;
    double acc = 0.0;
    for (std::size_t i = 0; i < in_n; ++i) acc += row[i] * x[i];
    out[o] = acc + p.bias[o];
  }
  return out;
}

FcGrads fc_backward(const Tensor& x, const FcLayerParams& p, const Tensor& grad_out) {
  const std::size_t out_n = p.weights.dim(0), in_n = p.weights.dim(1);
  if (x.size() != in_n || grad_out.size() != out_n) throw ShapeError("fc_backward shape mismatch");
  FcGrads grads{Tensor(x.shape()), Tensor(p.weights.shape()), Tensor(p.bias.shape())};
  for (std::size_t o = 0; o < out_n; ++o) {
    const double g = grad_out[o];
    grads.bias[o] = g;
    const double* row = p.weights.raw() + o * in_n;
    double* grow = grads.weights.raw() + o * in_n;
    for (std::size_t i = 0; i < in_n; ++i) {
      grow[i] = g * x[i];
      grads.input[i] += g * row[i];
    }
  }
  return grads;
}

Tensor softmax(const Tensor& logits) {
  if (logits.size() == 0) throw ShapeError("softmax of an empty tensor");
  const double max = *std::max_element(logits.data().begin(), logits.data().end());
  Tensor p(logits.shape());
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    p[i] = std::exp(logits[i] - max);
    sum += p[i];
  }
  for (double& v : p.data()) v /= sum;
  return p;
}

LossResult softmax_cross_entropy(const Tensor& logits, int label) {
  if (label < 0 || static_cast<std::size_t>(label) >= logits.size()) {
    throw InvalidParameter("label " + std::to_string(label) + " out of range for " +
                           std::to_string(logits.size()) + " classes");
  }
  // Log-sum-exp form keeps the loss finite even when p[label] underflows.
  const double max = *std::max_element(logits.data().begin(), logits.data().end());
  double sum = 0.0;
  for (double v : logits.data()) sum += std::exp(v - max);
  const double log_z = max + std::log(sum);

  LossResult result{log_z - logits[static_cast<std::size_t>(label)], softmax(logits)};
  result.grad[static_cast<std::size_t>(label)] -= 1.0;
  return result;
}

}  // namespace rcc
