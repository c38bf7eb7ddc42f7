#pragma once

#include <cstdint>
#include <vector>

#include "pbt/numcore/lstm.hpp"
#include "pbt/numcore/rng.hpp"

namespace pbt::drqn {

using nn::ParamId;
using nn::ParamSet;
using nn::Tensor;

struct QNetConfig {
  std::size_t input_dim = 0;  // latent + context
  std::size_t hidden = 64;
  std::size_t actions = 6;

  void validate() const;
};

template <typename T>
using QState = nn::LstmState<T>;

template <typename T>
struct QStepCache {
  nn::LstmStepCache<T> lstm;
  Tensor<T> h;   // LSTM output
  Tensor<T> a1;  // first dense after ReLU
};

/// LSTM over per-step inputs followed by dense + ReLU and a linear layer to
/// one value per action. All functions take the parameter set explicitly so
/// a copied ParamSet serves as the target network.
template <typename T>
class QNet {
 public:
  QNet() = default;
  QNet(const QNetConfig& cfg, std::uint64_t seed);

  const QNetConfig& config() const noexcept { return cfg_; }
  ParamSet<T>& params() noexcept { return params_; }
  const ParamSet<T>& params() const noexcept { return params_; }

  QState<T> initial_state(std::size_t batch) const;

  /// x [B x input_dim]; advances state and returns values [B x actions].
  Tensor<T> step(const ParamSet<T>& p, const Tensor<T>& x, QState<T>& state, QStepCache<T>* cache = nullptr) const;
  Tensor<T> step(const Tensor<T>& x, QState<T>& state, QStepCache<T>* cache = nullptr) const {
    return step(params_, x, state, cache);
  }

  /// Backward through one step. dq is d/d(values); dh_next and dc_next carry
  /// gradient from later steps into this step's outputs. Returns d/dh_prev and
  /// d/dc_prev. Gradients accumulate into `grads`, which must mirror params().
  nn::LstmBackward<T> step_backward(const ParamSet<T>& p, ParamSet<T>& grads, const QStepCache<T>& cache,
                                    const Tensor<T>& dq, const Tensor<T>& dh_next, const Tensor<T>& dc_next) const;

  /// Values at every step of one sequence [L x input_dim] -> [L x actions].
  Tensor<T> unroll(const ParamSet<T>& p, const Tensor<T>& sequence) const;

 private:
  QNetConfig cfg_;
  ParamSet<T> params_;
  nn::LstmLayer lstm_;
  ParamId w1_, b1_, w2_, b2_;
};

}  // namespace pbt::drqn
