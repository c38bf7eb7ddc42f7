#include "pbt/drqn/qnet.hpp"

#include <algorithm>

#include "pbt/numcore/ops.hpp"

namespace pbt::drqn {

void QNetConfig::validate() const {
  require(input_dim >= 1, "qnet: input dimension must be >= 1");
  require(hidden >= 1, "qnet: hidden size must be >= 1");
  require(actions >= 1, "qnet: need at least one action");
}

template <typename T>
QNet<T>::QNet(const QNetConfig& cfg, std::uint64_t seed) : cfg_(cfg) {
  cfg_.validate();
  Rng rng(derive_seed(seed, "qnet-init"));
  lstm_ = nn::LstmLayer::create(params_, "q.lstm", cfg_.input_dim, cfg_.hidden, rng);
  w1_ = params_.add("q.fc1.w", nn::he_uniform<T>({cfg_.hidden, cfg_.hidden}, cfg_.hidden, rng));
  b1_ = params_.add("q.fc1.b", Tensor<T>({cfg_.hidden}));
  w2_ = params_.add("q.fc2.w", nn::uniform_fan_in<T>({cfg_.hidden, cfg_.actions}, cfg_.hidden, rng));
  b2_ = params_.add("q.fc2.b", Tensor<T>({cfg_.actions}));
}

template <typename T>
QState<T> QNet<T>::initial_state(std::size_t batch) const {
  return {Tensor<T>({batch, cfg_.hidden}), Tensor<T>({batch, cfg_.hidden})};
}

template <typename T>
Tensor<T> QNet<T>::step(const ParamSet<T>& p, const Tensor<T>& x, QState<T>& state, QStepCache<T>* cache) const {
  require(x.rank() == 2 && x.dim(1) == cfg_.input_dim,
          "qnet: input " + nn::to_string(x.shape()) + " must be [B x " + std::to_string(cfg_.input_dim) + "]");
  require(state.h.rank() == 2 && state.h.dim(0) == x.dim(0) && state.h.dim(1) == cfg_.hidden,
          "qnet: state does not match the input batch");
  state = nn::lstm_step(p, lstm_, x, state, cache ? &cache->lstm : nullptr);
  Tensor<T> a1 = nn::relu(nn::dense_forward(state.h, p.value(w1_), p.value(b1_)));
  Tensor<T> q = nn::dense_forward(a1, p.value(w2_), p.value(b2_));
  if (cache) {
    cache->h = state.h;
    cache->a1 = std::move(a1);
  }
  return q;
}

template <typename T>
nn::LstmBackward<T> QNet<T>::step_backward(const ParamSet<T>& p, ParamSet<T>& grads, const QStepCache<T>& cache,
                                           const Tensor<T>& dq, const Tensor<T>& dh_next,
                                           const Tensor<T>& dc_next) const {
  Tensor<T> da1 = nn::dense_backward(cache.a1, p.value(w2_), dq, grads.grad(w2_), grads.grad(b2_));
  da1 = nn::relu_backward(cache.a1, da1);
  Tensor<T> dh = nn::dense_backward(cache.h, p.value(w1_), da1, grads.grad(w1_), grads.grad(b1_));
  for (std::size_t i = 0; i < dh.size(); ++i) dh[i] += dh_next[i];
  return nn::lstm_step_backward(cache.lstm, p.value(lstm_.w_x), p.value(lstm_.w_h), dh, dc_next,
                                grads.grad(lstm_.w_x), grads.grad(lstm_.w_h), grads.grad(lstm_.b));
}

template <typename T>
Tensor<T> QNet<T>::unroll(const ParamSet<T>& p, const Tensor<T>& sequence) const {
  require(sequence.rank() == 2 && sequence.dim(1) == cfg_.input_dim, "qnet unroll: sequence must be [L x input]");
  const std::size_t len = sequence.dim(0), d = cfg_.input_dim;
  Tensor<T> out({len, cfg_.actions});
  QState<T> s = initial_state(1);
  Tensor<T> x({1, d});
  for (std::size_t t = 0; t < len; ++t) {
    std::copy_n(sequence.raw() + t * d, d, x.raw());
    const Tensor<T> q = step(p, x, s);
    std::copy_n(q.raw(), cfg_.actions, out.raw() + t * cfg_.actions);
  }
  return out;
}

template class QNet<float>;
template class QNet<double>;

}  // namespace pbt::drqn
