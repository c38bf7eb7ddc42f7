#pragma once

#include <cmath>
#include <cstddef>
#include <random>
#include <span>

#include "pbt/numcore/tensor.hpp"

// Forward/backward kernels for the layers the architecture uses. Backward
// functions accumulate (+=) into parameter gradients and return the gradient
// with respect to the layer input.
namespace pbt::nn {

// ---- dense -----------------------------------------------------------------

/// y = x W + b. x may have any rank; its last axis is the input width.
template <typename T>
Tensor<T> dense_forward(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b);

template <typename T>
Tensor<T> dense_backward(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& dy, Tensor<T>& dw,
                         Tensor<T>& db);

// ---- spatial graph convolution ---------------------------------------------

/// Per frame: Y[b,t] = A_hat * X[b,t] * W. X is [batch x T x J x C_in].
template <typename T>
Tensor<T> graph_conv_forward(const Tensor<T>& x, const Tensor<T>& a_hat, const Tensor<T>& w);

template <typename T>
Tensor<T> graph_conv_backward(const Tensor<T>& x, const Tensor<T>& a_hat, const Tensor<T>& w,
                              const Tensor<T>& dy, Tensor<T>& dw);

// ---- temporal convolution --------------------------------------------------

std::size_t temporal_output_length(std::size_t frames, std::size_t kernel, std::size_t stride);

/// Valid 1-D convolution over the frame axis, independently per joint.
/// kernel is [k x C x C'], output is [batch x T' x J x C'] with
/// T' = floor((T - k) / stride) + 1.
template <typename T>
Tensor<T> temporal_conv_forward(const Tensor<T>& x, const Tensor<T>& kernel, std::size_t stride = 1);

template <typename T>
Tensor<T> temporal_conv_backward(const Tensor<T>& x, const Tensor<T>& kernel, std::size_t stride,
                                 const Tensor<T>& dy, Tensor<T>& dkernel);

/// Transposed temporal convolution (frame upsampling). kernel is [C x k x C'],
/// output length is (T - 1) * stride + k.
template <typename T>
Tensor<T> temporal_conv_transpose_forward(const Tensor<T>& x, const Tensor<T>& kernel, std::size_t stride);

template <typename T>
Tensor<T> temporal_conv_transpose_backward(const Tensor<T>& x, const Tensor<T>& kernel, std::size_t stride,
                                           const Tensor<T>& dy, Tensor<T>& dkernel);

// ---- elementwise and reductions --------------------------------------------

/// Adds b along the last axis in place.
template <typename T>
void add_bias(Tensor<T>& x, const Tensor<T>& b);
template <typename T>
void bias_backward(const Tensor<T>& dy, Tensor<T>& db);

template <typename T>
Tensor<T> relu(const Tensor<T>& x);
/// Uses the forward output: dx = dy where y > 0.
template <typename T>
Tensor<T> relu_backward(const Tensor<T>& y, const Tensor<T>& dy);

/// Mean over the frame and joint axes: [B x T x J x C] -> [B x C].
template <typename T>
Tensor<T> mean_pool_frames_joints(const Tensor<T>& x);
template <typename T>
Tensor<T> mean_pool_frames_joints_backward(const Shape& input_shape, const Tensor<T>& dy);

/// Row-wise softmax of a [rows x classes] tensor.
template <typename T>
Tensor<T> softmax_rows(const Tensor<T>& logits);

/// Mean cross-entropy over rows with a label >= 0; rows labelled -1 are
/// ignored. Writes d(loss)/d(logits) into dlogits when non-null.
template <typename T>
double softmax_cross_entropy(const Tensor<T>& logits, std::span<const int> labels, Tensor<T>* dlogits);

/// Inverted dropout: keeps each unit with probability 1 - p and scales kept
/// units by 1 / (1 - p). mask receives the per-unit multiplier.
template <typename T, typename Rng>
Tensor<T> dropout_forward(const Tensor<T>& x, double p, Rng& rng, Tensor<T>& mask);

template <typename T>
T sigmoid(T v) {
  return T{1} / (T{1} + std::exp(-v));
}

template <typename T, typename Rng>
Tensor<T> dropout_forward(const Tensor<T>& x, double p, Rng& rng, Tensor<T>& mask) {
  require(p >= 0.0 && p < 1.0, "dropout rate must lie in [0, 1)");
  mask = Tensor<T>(x.shape(), T{1});
  Tensor<T> y = x;
  if (p == 0.0) return y;
  std::bernoulli_distribution keep(1.0 - p);
  const T scale = static_cast<T>(1.0 / (1.0 - p));
  for (std::size_t i = 0; i < x.size(); ++i) {
    mask[i] = keep(rng) ? scale : T{0};
    y[i] *= mask[i];
  }
  return y;
}

}  // namespace pbt::nn
