#include "pbt/repr/normalizer.hpp"

#include <cmath>

#include "pbt/common.hpp"

namespace pbt::repr {

namespace {
template <typename T>
void check_layout(const nn::Tensor<T>& x, std::size_t joints, std::size_t channels) {
  require(x.rank() == 4 && x.dim(2) == joints && x.dim(3) == channels,
          "normalizer: tensor " + nn::to_string(x.shape()) + " does not match fitted layout [* x * x " +
              std::to_string(joints) + " x " + std::to_string(channels) + "]");
}
}  // namespace

template <typename T>
Normalizer Normalizer::fit(const nn::Tensor<T>& windows) {
  require(windows.rank() == 4 && windows.size() > 0, "normalizer: need a non-empty [B x T x J x C] tensor");
  Normalizer n;
  n.joints = windows.dim(2);
  n.channels = windows.dim(3);
  const std::size_t jc = n.joints * n.channels;
  const std::size_t rows = windows.size() / jc;
  n.mean.assign(jc, 0.0);
  n.stddev.assign(jc, 0.0);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t k = 0; k < jc; ++k) n.mean[k] += static_cast<double>(windows[r * jc + k]);
  for (auto& m : n.mean) m /= static_cast<double>(rows);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t k = 0; k < jc; ++k) {
      const double d = static_cast<double>(windows[r * jc + k]) - n.mean[k];
      n.stddev[k] += d * d;
    }
  // One scale per channel, pooled over the joints on which it varies.
  for (std::size_t c = 0; c < n.channels; ++c) {
    double pooled = 0.0;
    std::size_t varying = 0;
    for (std::size_t j = 0; j < n.joints; ++j) {
      const double var = n.stddev[j * n.channels + c] / static_cast<double>(rows);
      if (std::sqrt(var) >= kMinStd) {
        pooled += var;
        ++varying;
      }
    }
    const double scale = varying ? std::sqrt(pooled / static_cast<double>(varying)) : 1.0;
    for (std::size_t j = 0; j < n.joints; ++j) n.stddev[j * n.channels + c] = scale;
  }
  return n;
}

template <typename T>
void Normalizer::apply(nn::Tensor<T>& windows) const {
  require(fitted(), "normalizer: not fitted");
  check_layout(windows, joints, channels);
  const std::size_t jc = joints * channels;
  for (std::size_t i = 0; i < windows.size(); ++i) {
    const std::size_t k = i % jc;
    windows[i] = static_cast<T>((static_cast<double>(windows[i]) - mean[k]) / stddev[k]);
  }
}

template <typename T>
void Normalizer::invert(nn::Tensor<T>& windows) const {
  require(fitted(), "normalizer: not fitted");
  check_layout(windows, joints, channels);
  const std::size_t jc = joints * channels;
  for (std::size_t i = 0; i < windows.size(); ++i) {
    const std::size_t k = i % jc;
    windows[i] = static_cast<T>(static_cast<double>(windows[i]) * stddev[k] + mean[k]);
  }
}

template Normalizer Normalizer::fit(const nn::Tensor<float>&);
template Normalizer Normalizer::fit(const nn::Tensor<double>&);
template void Normalizer::apply(nn::Tensor<float>&) const;
template void Normalizer::apply(nn::Tensor<double>&) const;
template void Normalizer::invert(nn::Tensor<float>&) const;
template void Normalizer::invert(nn::Tensor<double>&) const;

}  // namespace pbt::repr
