#include "pbt/numcore/ops.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

namespace pbt::nn {
namespace {

using Index = Eigen::Index;

template <typename T>
void expect_rank(const Tensor<T>& t, std::size_t rank, const char* what) {
  require(t.rank() == rank, std::string(what) + " must have rank " + std::to_string(rank) + ", got " +
                                to_string(t.shape()));
}

std::size_t leading_rows(const Shape& shape) {
  std::size_t rows = 1;
  for (std::size_t i = 0; i + 1 < shape.size(); ++i) rows *= shape[i];
  return rows;
}

}  // namespace

// ---- dense -----------------------------------------------------------------

template <typename T>
Tensor<T> dense_forward(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b) {
  expect_rank(w, 2, "dense weight");
  require(x.rank() >= 1 && x.shape().back() == w.dim(0),
          "dense_forward: input " + to_string(x.shape()) + " does not conform to weight " + to_string(w.shape()));
  require(b.size() == w.dim(1),
          "dense_forward: bias " + to_string(b.shape()) + " does not conform to weight " + to_string(w.shape()));
  const std::size_t rows = leading_rows(x.shape());
  const std::size_t in = w.dim(0);
  const std::size_t out = w.dim(1);
  Shape out_shape = x.shape();
  out_shape.back() = out;
  Tensor<T> y(out_shape);
  auto ym = y.matrix(rows, out);
  ym.noalias() = x.matrix(rows, in) * w.matrix(in, out);
  ym.rowwise() += b.as_row();
  return y;
}

template <typename T>
Tensor<T> dense_backward(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& dy, Tensor<T>& dw,
                         Tensor<T>& db) {
  const std::size_t rows = leading_rows(x.shape());
  const std::size_t in = w.dim(0);
  const std::size_t out = w.dim(1);
  require(dy.size() == rows * out, "dense_backward: gradient " + to_string(dy.shape()) +
                                       " does not conform to output width " + std::to_string(out));
  auto dym = dy.matrix(rows, out);
  dw.matrix(in, out).noalias() += x.matrix(rows, in).transpose() * dym;
  db.as_row() += dym.colwise().sum();
  Tensor<T> dx(x.shape());
  dx.matrix(rows, in).noalias() = dym * w.matrix(in, out).transpose();
  return dx;
}

// ---- spatial graph convolution ---------------------------------------------

template <typename T>
Tensor<T> graph_conv_forward(const Tensor<T>& x, const Tensor<T>& a_hat, const Tensor<T>& w) {
  expect_rank(x, 4, "graph_conv input");
  expect_rank(a_hat, 2, "adjacency");
  expect_rank(w, 2, "graph_conv weight");
  const std::size_t batch = x.dim(0), frames = x.dim(1), joints = x.dim(2), cin = x.dim(3);
  require(a_hat.dim(0) == joints && a_hat.dim(1) == joints,
          "graph_conv_forward: joint count of input " + to_string(x.shape()) + " does not match adjacency " +
              to_string(a_hat.shape()));
  require(w.dim(0) == cin, "graph_conv_forward: input " + to_string(x.shape()) + " does not conform to weight " +
                               to_string(w.shape()));
  const std::size_t cout = w.dim(1);
  const std::size_t rows = batch * frames * joints;

  RowMatrix<T> z = x.matrix(rows, cin) * w.matrix(cin, cout);
  Tensor<T> y({batch, frames, joints, cout});
  const auto a = a_hat.matrix(joints, joints);
  const std::size_t block = joints * cout;
  for (std::size_t bt = 0; bt < batch * frames; ++bt) {
    ConstMatrixMap<T> zb(z.data() + bt * block, static_cast<Index>(joints), static_cast<Index>(cout));
    MatrixMap<T> yb(y.raw() + bt * block, static_cast<Index>(joints), static_cast<Index>(cout));
    yb.noalias() = a * zb;
  }
  return y;
}

template <typename T>
Tensor<T> graph_conv_backward(const Tensor<T>& x, const Tensor<T>& a_hat, const Tensor<T>& w,
                              const Tensor<T>& dy, Tensor<T>& dw) {
  const std::size_t batch = x.dim(0), frames = x.dim(1), joints = x.dim(2), cin = x.dim(3);
  const std::size_t cout = w.dim(1);
  const std::size_t rows = batch * frames * joints;
  require(dy.size() == rows * cout, "graph_conv_backward: gradient " + to_string(dy.shape()) +
                                        " does not conform to input " + to_string(x.shape()));
  RowMatrix<T> dz(static_cast<Index>(rows), static_cast<Index>(cout));
  const auto at = a_hat.matrix(joints, joints).transpose();
  const std::size_t block = joints * cout;
  for (std::size_t bt = 0; bt < batch * frames; ++bt) {
    ConstMatrixMap<T> dyb(dy.raw() + bt * block, static_cast<Index>(joints), static_cast<Index>(cout));
    MatrixMap<T> dzb(dz.data() + bt * block, static_cast<Index>(joints), static_cast<Index>(cout));
    dzb.noalias() = at * dyb;
  }
  dw.matrix(cin, cout).noalias() += x.matrix(rows, cin).transpose() * dz;
  Tensor<T> dx(x.shape());
  dx.matrix(rows, cin).noalias() = dz * w.matrix(cin, cout).transpose();
  return dx;
}

// ---- temporal convolution --------------------------------------------------

std::size_t temporal_output_length(std::size_t frames, std::size_t kernel, std::size_t stride) {
  require(stride >= 1, "temporal convolution stride must be >= 1");
  require(kernel >= 1, "temporal convolution kernel must be >= 1");
  require(frames >= kernel, "temporal convolution needs at least " + std::to_string(kernel) + " frames, got " +
                                std::to_string(frames));
  return (frames - kernel) / stride + 1;
}

namespace {

// Gathers, for each output row (b, t', j), the k input rows feeding it.
template <typename T>
RowMatrix<T> temporal_im2col(const Tensor<T>& x, std::size_t k, std::size_t stride, std::size_t out_frames) {
  const std::size_t batch = x.dim(0), frames = x.dim(1), joints = x.dim(2), c = x.dim(3);
  RowMatrix<T> cols(static_cast<Index>(batch * out_frames * joints), static_cast<Index>(k * c));
  T* dst = cols.data();
  for (std::size_t b = 0; b < batch; ++b)
    for (std::size_t t = 0; t < out_frames; ++t)
      for (std::size_t j = 0; j < joints; ++j)
        for (std::size_t kk = 0; kk < k; ++kk) {
          const T* src = x.raw() + ((b * frames + t * stride + kk) * joints + j) * c;
          std::memcpy(dst, src, c * sizeof(T));
          dst += c;
        }
  return cols;
}

}  // namespace

template <typename T>
Tensor<T> temporal_conv_forward(const Tensor<T>& x, const Tensor<T>& kernel, std::size_t stride) {
  expect_rank(x, 4, "temporal_conv input");
  expect_rank(kernel, 3, "temporal_conv kernel");
  const std::size_t batch = x.dim(0), frames = x.dim(1), joints = x.dim(2), c = x.dim(3);
  const std::size_t k = kernel.dim(0);
  require(kernel.dim(1) == c, "temporal_conv_forward: input " + to_string(x.shape()) +
                                  " does not conform to kernel " + to_string(kernel.shape()));
  const std::size_t cout = kernel.dim(2);
  const std::size_t out_frames = temporal_output_length(frames, k, stride);
  const RowMatrix<T> cols = temporal_im2col(x, k, stride, out_frames);
  Tensor<T> y({batch, out_frames, joints, cout});
  y.matrix(batch * out_frames * joints, cout).noalias() = cols * kernel.matrix(k * c, cout);
  return y;
}

template <typename T>
Tensor<T> temporal_conv_backward(const Tensor<T>& x, const Tensor<T>& kernel, std::size_t stride,
                                 const Tensor<T>& dy, Tensor<T>& dkernel) {
  const std::size_t batch = x.dim(0), frames = x.dim(1), joints = x.dim(2), c = x.dim(3);
  const std::size_t k = kernel.dim(0), cout = kernel.dim(2);
  const std::size_t out_frames = temporal_output_length(frames, k, stride);
  const std::size_t rows = batch * out_frames * joints;
  require(dy.size() == rows * cout, "temporal_conv_backward: gradient " + to_string(dy.shape()) +
                                        " does not conform to output length " + std::to_string(out_frames));
  const RowMatrix<T> cols = temporal_im2col(x, k, stride, out_frames);
  const auto dym = dy.matrix(rows, cout);
  dkernel.matrix(k * c, cout).noalias() += cols.transpose() * dym;
  const RowMatrix<T> dcols = dym * kernel.matrix(k * c, cout).transpose();

  Tensor<T> dx(x.shape());
  const T* src = dcols.data();
  for (std::size_t b = 0; b < batch; ++b)
    for (std::size_t t = 0; t < out_frames; ++t)
      for (std::size_t j = 0; j < joints; ++j)
        for (std::size_t kk = 0; kk < k; ++kk) {
          T* dst = dx.raw() + ((b * frames + t * stride + kk) * joints + j) * c;
          for (std::size_t ch = 0; ch < c; ++ch) dst[ch] += src[ch];
          src += c;
        }
  return dx;
}

template <typename T>
Tensor<T> temporal_conv_transpose_forward(const Tensor<T>& x, const Tensor<T>& kernel, std::size_t stride) {
  expect_rank(x, 4, "temporal_conv_transpose input");
  expect_rank(kernel, 3, "temporal_conv_transpose kernel");
  require(stride >= 1, "temporal_conv_transpose stride must be >= 1");
  const std::size_t batch = x.dim(0), frames = x.dim(1), joints = x.dim(2), c = x.dim(3);
  require(kernel.dim(0) == c, "temporal_conv_transpose_forward: input " + to_string(x.shape()) +
                                  " does not conform to kernel " + to_string(kernel.shape()));
  const std::size_t k = kernel.dim(1), cout = kernel.dim(2);
  const std::size_t out_frames = (frames - 1) * stride + k;
  const RowMatrix<T> p = x.matrix(batch * frames * joints, c) * kernel.matrix(c, k * cout);
  Tensor<T> y({batch, out_frames, joints, cout});
  const T* src = p.data();
  for (std::size_t b = 0; b < batch; ++b)
    for (std::size_t t = 0; t < frames; ++t)
      for (std::size_t j = 0; j < joints; ++j)
        for (std::size_t kk = 0; kk < k; ++kk) {
          T* dst = y.raw() + ((b * out_frames + t * stride + kk) * joints + j) * cout;
          for (std::size_t ch = 0; ch < cout; ++ch) dst[ch] += src[ch];
          src += cout;
        }
  return y;
}

template <typename T>
Tensor<T> temporal_conv_transpose_backward(const Tensor<T>& x, const Tensor<T>& kernel, std::size_t stride,
                                           const Tensor<T>& dy, Tensor<T>& dkernel) {
  const std::size_t batch = x.dim(0), frames = x.dim(1), joints = x.dim(2), c = x.dim(3);
  const std::size_t k = kernel.dim(1), cout = kernel.dim(2);
  const std::size_t out_frames = (frames - 1) * stride + k;
  require(dy.size() == batch * out_frames * joints * cout,
          "temporal_conv_transpose_backward: gradient " + to_string(dy.shape()) + " does not conform");
  RowMatrix<T> dp(static_cast<Index>(batch * frames * joints), static_cast<Index>(k * cout));
  T* dst = dp.data();
  for (std::size_t b = 0; b < batch; ++b)
    for (std::size_t t = 0; t < frames; ++t)
      for (std::size_t j = 0; j < joints; ++j)
        for (std::size_t kk = 0; kk < k; ++kk) {
          const T* src = dy.raw() + ((b * out_frames + t * stride + kk) * joints + j) * cout;
          std::memcpy(dst, src, cout * sizeof(T));
          dst += cout;
        }
  const std::size_t rows = batch * frames * joints;
  dkernel.matrix(c, k * cout).noalias() += x.matrix(rows, c).transpose() * dp;
  Tensor<T> dx(x.shape());
  dx.matrix(rows, c).noalias() = dp * kernel.matrix(c, k * cout).transpose();
  return dx;
}

// ---- elementwise and reductions --------------------------------------------

template <typename T>
void add_bias(Tensor<T>& x, const Tensor<T>& b) {
  const std::size_t width = b.size();
  require(x.rank() >= 1 && x.shape().back() == width,
          "add_bias: tensor " + to_string(x.shape()) + " does not conform to bias " + to_string(b.shape()));
  x.matrix(x.size() / width, width).rowwise() += b.as_row();
}

template <typename T>
void bias_backward(const Tensor<T>& dy, Tensor<T>& db) {
  const std::size_t width = db.size();
  db.as_row() += dy.matrix(dy.size() / width, width).colwise().sum();
}

template <typename T>
Tensor<T> relu(const Tensor<T>& x) {
  Tensor<T> y = x;
  for (auto& v : y.data()) v = v > T{0} ? v : T{0};
  return y;
}

template <typename T>
Tensor<T> relu_backward(const Tensor<T>& y, const Tensor<T>& dy) {
  require(y.size() == dy.size(), "relu_backward: shape mismatch " + to_string(y.shape()) + " vs " +
                                     to_string(dy.shape()));
  Tensor<T> dx = dy;
  for (std::size_t i = 0; i < dx.size(); ++i)
    if (!(y[i] > T{0})) dx[i] = T{0};
  return dx;
}

template <typename T>
Tensor<T> mean_pool_frames_joints(const Tensor<T>& x) {
  expect_rank(x, 4, "mean_pool input");
  const std::size_t batch = x.dim(0), per = x.dim(1) * x.dim(2), c = x.dim(3);
  Tensor<T> y({batch, c});
  const T scale = T{1} / static_cast<T>(per);
  for (std::size_t b = 0; b < batch; ++b) {
    ConstMatrixMap<T> xb(x.raw() + b * per * c, static_cast<Index>(per), static_cast<Index>(c));
    y.matrix(batch, c).row(static_cast<Index>(b)) = xb.colwise().sum() * scale;
  }
  return y;
}

template <typename T>
Tensor<T> mean_pool_frames_joints_backward(const Shape& input_shape, const Tensor<T>& dy) {
  require(input_shape.size() == 4, "mean_pool_backward: input shape must have rank 4");
  const std::size_t batch = input_shape[0], per = input_shape[1] * input_shape[2], c = input_shape[3];
  require(dy.size() == batch * c, "mean_pool_backward: gradient " + to_string(dy.shape()) + " does not conform");
  Tensor<T> dx(input_shape);
  const T scale = T{1} / static_cast<T>(per);
  for (std::size_t b = 0; b < batch; ++b) {
    MatrixMap<T> dxb(dx.raw() + b * per * c, static_cast<Index>(per), static_cast<Index>(c));
    dxb.rowwise() = dy.matrix(batch, c).row(static_cast<Index>(b)) * scale;
  }
  return dx;
}

template <typename T>
Tensor<T> softmax_rows(const Tensor<T>& logits) {
  expect_rank(logits, 2, "softmax input");
  const std::size_t rows = logits.dim(0), cols = logits.dim(1);
  Tensor<T> p(logits.shape());
  for (std::size_t r = 0; r < rows; ++r) {
    const T* in = logits.raw() + r * cols;
    T* out = p.raw() + r * cols;
    const T mx = *std::max_element(in, in + cols);
    T sum{0};
    for (std::size_t c = 0; c < cols; ++c) {
      out[c] = std::exp(in[c] - mx);
      sum += out[c];
    }
    for (std::size_t c = 0; c < cols; ++c) out[c] /= sum;
  }
  return p;
}

template <typename T>
double softmax_cross_entropy(const Tensor<T>& logits, std::span<const int> labels, Tensor<T>* dlogits) {
  expect_rank(logits, 2, "cross-entropy logits");
  const std::size_t rows = logits.dim(0), cols = logits.dim(1);
  require(labels.size() == rows, "softmax_cross_entropy: " + std::to_string(labels.size()) + " labels for " +
                                     std::to_string(rows) + " rows");
  const Tensor<T> p = softmax_rows(logits);
  std::size_t counted = 0;
  for (int l : labels) {
    require(l < static_cast<int>(cols), "softmax_cross_entropy: label out of range");
    if (l >= 0) ++counted;
  }
  if (dlogits) *dlogits = Tensor<T>(logits.shape());
  if (counted == 0) return 0.0;
  double loss = 0.0;
  const T inv = T{1} / static_cast<T>(counted);
  for (std::size_t r = 0; r < rows; ++r) {
    const int l = labels[r];
    if (l < 0) continue;
    loss -= std::log(std::max(static_cast<double>(p[r * cols + static_cast<std::size_t>(l)]), 1e-300));
    if (dlogits) {
      for (std::size_t c = 0; c < cols; ++c) (*dlogits)[r * cols + c] = p[r * cols + c] * inv;
      (*dlogits)[r * cols + static_cast<std::size_t>(l)] -= inv;
    }
  }
  return loss / static_cast<double>(counted);
}

#define PBT_INSTANTIATE_OPS(T)                                                                                 \
  template Tensor<T> dense_forward(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&);                      \
  template Tensor<T> dense_backward(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, Tensor<T>&,          \
                                    Tensor<T>&);                                                               \
  template Tensor<T> graph_conv_forward(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&);                 \
  template Tensor<T> graph_conv_backward(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&,                 \
                                         const Tensor<T>&, Tensor<T>&);                                        \
  template Tensor<T> temporal_conv_forward(const Tensor<T>&, const Tensor<T>&, std::size_t);                   \
  template Tensor<T> temporal_conv_backward(const Tensor<T>&, const Tensor<T>&, std::size_t, const Tensor<T>&, \
                                            Tensor<T>&);                                                       \
  template Tensor<T> temporal_conv_transpose_forward(const Tensor<T>&, const Tensor<T>&, std::size_t);         \
  template Tensor<T> temporal_conv_transpose_backward(const Tensor<T>&, const Tensor<T>&, std::size_t,         \
                                                      const Tensor<T>&, Tensor<T>&);                           \
  template void add_bias(Tensor<T>&, const Tensor<T>&);                                                        \
  template void bias_backward(const Tensor<T>&, Tensor<T>&);                                                   \
  template Tensor<T> relu(const Tensor<T>&);                                                                   \
  template Tensor<T> relu_backward(const Tensor<T>&, const Tensor<T>&);                                        \
  template Tensor<T> mean_pool_frames_joints(const Tensor<T>&);                                                \
  template Tensor<T> mean_pool_frames_joints_backward(const Shape&, const Tensor<T>&);                         \
  template Tensor<T> softmax_rows(const Tensor<T>&);                                                           \
  template double softmax_cross_entropy(const Tensor<T>&, std::span<const int>, Tensor<T>*);

PBT_INSTANTIATE_OPS(float)
PBT_INSTANTIATE_OPS(double)

#undef PBT_INSTANTIATE_OPS

}  // namespace pbt::nn
