#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "pbt/numcore/params.hpp"
#include "pbt/numcore/rng.hpp"
#include "pbt/skeleton/skeleton.hpp"

namespace pbt::repr {

using nn::ParamId;
using nn::ParamSet;
using nn::Tensor;

/// Four spatio-temporal blocks: graph conv + bias + ReLU, then a valid
/// temporal conv + bias + ReLU, followed by a mean over frames and joints.
struct TrunkConfig {
  std::size_t in_channels = skeleton::kPackedChannels;
  std::array<std::size_t, 4> widths{16, 32, 32, 64};
  std::array<std::size_t, 4> strides{1, 2, 1, 2};
  std::size_t kernel = 3;

  void validate() const;
  std::size_t output_width() const { return widths.back(); }
  /// Frame count after the last block for an input of `frames`.
  std::size_t output_frames(std::size_t frames) const;
};

template <typename T>
struct TrunkCache {
  std::vector<Tensor<T>> block_in;    // input of each block
  std::vector<Tensor<T>> graph_out;   // after graph conv, bias, ReLU
  std::vector<Tensor<T>> time_out;    // after temporal conv, bias, ReLU
};

template <typename T>
class Trunk {
 public:
  Trunk() = default;
  Trunk(ParamSet<T>& params, const std::string& prefix, const TrunkConfig& cfg, const skeleton::SkeletonGraph& graph,
        Rng& rng);

  const TrunkConfig& config() const noexcept { return cfg_; }
  std::size_t joints() const noexcept { return joints_; }

  /// x is [B x T x J x C_in]; returns the pooled features [B x width].
  Tensor<T> forward(const ParamSet<T>& params, const Tensor<T>& x, TrunkCache<T>* cache = nullptr) const;
  /// Accumulates parameter gradients given d(loss)/d(pooled features).
  void backward(ParamSet<T>& params, const TrunkCache<T>& cache, const Tensor<T>& dpooled) const;

 private:
  struct Block {
    ParamId w_graph, b_graph, w_time, b_time;
    std::size_t stride = 1;
  };
  TrunkConfig cfg_;
  std::vector<Block> blocks_;
  Tensor<T> a_hat_;
  std::size_t joints_ = 0;
};

}  // namespace pbt::repr
