#include "pbt/repr/trunk.hpp"

#include "pbt/numcore/ops.hpp"

namespace pbt::repr {

void TrunkConfig::validate() const {
  require(in_channels > 0 && kernel > 0, "trunk: channels and kernel must be positive");
  for (std::size_t i = 0; i < 4; ++i) require(widths[i] > 0 && strides[i] > 0, "trunk: widths and strides must be positive");
}

std::size_t TrunkConfig::output_frames(std::size_t frames) const {
  for (auto s : strides) {
    require(frames >= kernel, "trunk: window too short for the temporal kernels");
    frames = nn::temporal_output_length(frames, kernel, s);
  }
  return frames;
}

template <typename T>
Trunk<T>::Trunk(ParamSet<T>& params, const std::string& prefix, const TrunkConfig& cfg,
                const skeleton::SkeletonGraph& graph, Rng& rng)
    : cfg_(cfg), a_hat_(skeleton::normalized_adjacency<T>(graph)), joints_(graph.joint_count()) {
  cfg_.validate();
  std::size_t c = cfg_.in_channels;
  for (std::size_t i = 0; i < 4; ++i) {
    const std::size_t w = cfg_.widths[i];
    const std::string p = prefix + ".block" + std::to_string(i);
    Block b;
    b.stride = cfg_.strides[i];
    b.w_graph = params.add(p + ".graph.w", nn::he_uniform<T>({c, w}, c, rng));
    b.b_graph = params.add(p + ".graph.b", Tensor<T>({w}));
    b.w_time = params.add(p + ".time.w", nn::he_uniform<T>({cfg_.kernel, w, w}, cfg_.kernel * w, rng));
    b.b_time = params.add(p + ".time.b", Tensor<T>({w}));
    blocks_.push_back(b);
    c = w;
  }
}

template <typename T>
Tensor<T> Trunk<T>::forward(const ParamSet<T>& params, const Tensor<T>& x, TrunkCache<T>* cache) const {
  require(x.rank() == 4 && x.dim(2) == joints_ && x.dim(3) == cfg_.in_channels,
          "trunk: input " + nn::to_string(x.shape()) + " must be [B x T x " + std::to_string(joints_) + " x " +
              std::to_string(cfg_.in_channels) + "]");
  if (cache) *cache = TrunkCache<T>{};
  Tensor<T> h = x;
  for (const auto& b : blocks_) {
    Tensor<T> g = nn::graph_conv_forward(h, a_hat_, params.value(b.w_graph));
    nn::add_bias(g, params.value(b.b_graph));
    g = nn::relu(g);
    Tensor<T> t = nn::temporal_conv_forward(g, params.value(b.w_time), b.stride);
    nn::add_bias(t, params.value(b.b_time));
    t = nn::relu(t);
    if (cache) {
      cache->block_in.push_back(std::move(h));
      cache->graph_out.push_back(g);
      cache->time_out.push_back(t);
    }
    h = std::move(t);
  }
  return nn::mean_pool_frames_joints(h);
}

template <typename T>
void Trunk<T>::backward(ParamSet<T>& params, const TrunkCache<T>& cache, const Tensor<T>& dpooled) const {
  require(cache.time_out.size() == blocks_.size(), "trunk backward: cache is empty");
  Tensor<T> d = nn::mean_pool_frames_joints_backward(cache.time_out.back().shape(), dpooled);
  for (std::size_t i = blocks_.size(); i-- > 0;) {
    const auto& b = blocks_[i];
    d = nn::relu_backward(cache.time_out[i], d);
    nn::bias_backward(d, params.grad(b.b_time));
    d = nn::temporal_conv_backward(cache.graph_out[i], params.value(b.w_time), b.stride, d, params.grad(b.w_time));
    d = nn::relu_backward(cache.graph_out[i], d);
    nn::bias_backward(d, params.grad(b.b_graph));
    d = nn::graph_conv_backward(cache.block_in[i], a_hat_, params.value(b.w_graph), d, params.grad(b.w_graph));
  }
}

template class Trunk<float>;
template class Trunk<double>;

}  // namespace pbt::repr
