#pragma once

// Forward and backward passes of the individual CNN layers. Convolutions are
// cross-correlations with stride 1 and zero padding:
//   z[o,i,j] = b[o] + sum_c sum_m sum_n w[o,c,m,n] * x[c, i+m-pad, j+n-pad]

#include <cstddef>
#include <vector>

#include "rcc/tensor.hpp"

namespace rcc {

struct ConvLayerParams {
  Tensor filters;  // (out_ch, in_ch, M, N), M and N odd
  Tensor bias;     // (out_ch)
  int padding = 0;
};

struct FcLayerParams {
  Tensor weights;  // (out, in)
  Tensor bias;     // (out)
};

struct PoolSpec {
  int k = 2;  // window and stride
};

struct PoolResult {
  Tensor output;
  /// Flat input index of the selected element, one per output element.
  std::vector<std::size_t> argmax;
};

struct ConvGrads {
  Tensor input;  // empty when not requested
  Tensor filters;
  Tensor bias;
};

struct FcGrads {
  Tensor input;
  Tensor weights;
  Tensor bias;
};

struct LossResult {
  double loss = 0.0;
  Tensor grad;  // d loss / d logits
};

Tensor conv2d_forward(const Tensor& x, const ConvLayerParams& p);
ConvGrads conv2d_backward(const Tensor& x, const ConvLayerParams& p, const Tensor& grad_out,
                          bool need_input_grad = true);

Tensor relu(const Tensor& x);
/// Passes grad where the pre-activation was positive.
Tensor relu_backward(const Tensor& pre_activation, const Tensor& grad_out);

/// Block maxima over k x k windows; ties select the first element in
/// row-major block order.
PoolResult maxpool_forward(const Tensor& x, const PoolSpec& spec = {});
Tensor maxpool_backward(const PoolResult& forward, const Shape& input_shape, const Tensor& grad_out);

Tensor fc_forward(const Tensor& x, const FcLayerParams& p);
FcGrads fc_backward(const Tensor& x, const FcLayerParams& p, const Tensor& grad_out);

/// Max-shifted softmax.
Tensor softmax(const Tensor& logits);
LossResult softmax_cross_entropy(const Tensor& logits, int label);

}  // namespace rcc
