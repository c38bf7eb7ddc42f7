#pragma once

#include <cstddef>
#include <vector>

#include "pbt/numcore/tensor.hpp"

namespace pbt::repr {

/// Standardization of packed window tensors [B x T x J x C]: the mean is
/// removed per (joint, channel) and each channel is divided by one scale
/// pooled over the joints on which it varies (std >= 1e-6), so nearly rigid
/// joints are not inflated to unit variance.
struct Normalizer {
  std::size_t joints = 0;
  std::size_t channels = 0;
  std::vector<double> mean;
  std::vector<double> stddev;

  static constexpr double kMinStd = 1e-6;

  template <typename T>
  static Normalizer fit(const nn::Tensor<T>& windows);

  bool fitted() const noexcept { return !mean.empty(); }

  template <typename T>
  void apply(nn::Tensor<T>& windows) const;
  template <typename T>
  void invert(nn::Tensor<T>& windows) const;

  friend bool operator==(const Normalizer&, const Normalizer&) = default;
};

}  // namespace pbt::repr
