#pragma once

#include <cstdint>
#include <vector>

#include "pbt/numcore/params.hpp"

namespace pbt::nn {

struct AdamOptions {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// First/second moment buffers mirroring a ParamSet.
template <typename T>
struct AdamState {
  AdamState() = default;
  AdamState(const ParamSet<T>& params, AdamOptions opts);

  AdamOptions options;
  std::uint64_t step = 0;
  std::vector<Tensor<T>> m;
  std::vector<Tensor<T>> v;
};

/// Bias-corrected Adam update applied in place. Gradients are left as they
/// are; callers zero them before the next accumulation.
template <typename T>
void adam_step(ParamSet<T>& params, AdamState<T>& state);

extern template struct AdamState<float>;
extern template struct AdamState<double>;

}  // namespace pbt::nn
