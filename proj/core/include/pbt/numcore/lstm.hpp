#pragma once

#include <cstddef>
#include <random>

#include "pbt/numcore/params.hpp"
#include "pbt/numcore/tensor.hpp"

namespace pbt::nn {

/// Parameter handles of one LSTM cell. Gate blocks are packed [i | f | g | o]
/// along the 4H axis of w_x [d_in x 4H], w_h [H x 4H] and b [4H].
struct LstmLayer {
  ParamId w_x, w_h, b;
  std::size_t input_size = 0;
  std::size_t hidden_size = 0;

  /// Registers the parameters: uniform fan-in init, forget-gate bias 1.0.
  template <typename T, typename Rng>
  static LstmLayer create(ParamSet<T>& params, const std::string& prefix, std::size_t input_size,
                          std::size_t hidden_size, Rng& rng) {
    LstmLayer l;
    l.input_size = input_size;
    l.hidden_size = hidden_size;
    const std::size_t g = 4 * hidden_size;
    l.w_x = params.add(prefix + ".w_x", uniform_fan_in<T>({input_size, g}, input_size + hidden_size, rng));
    l.w_h = params.add(prefix + ".w_h", uniform_fan_in<T>({hidden_size, g}, input_size + hidden_size, rng));
    Tensor<T> b({g});
    for (std::size_t j = hidden_size; j < 2 * hidden_size; ++j) b[j] = T{1};
    l.b = params.add(prefix + ".b", std::move(b));
    return l;
  }
};

/// Everything the backward pass of one cell step needs.
template <typename T>
struct LstmStepCache {
  Tensor<T> x, h_prev, c_prev;
  Tensor<T> gates;  // activated gates [batch x 4H]: sigmoid(i,f,o), tanh(g)
  Tensor<T> c;
  Tensor<T> tanh_c;
};

template <typename T>
struct LstmState {
  Tensor<T> h, c;
};

/// Standard LSTM cell: i,f,o = sigmoid, g = tanh, c' = f*c + i*g,
/// h' = o*tanh(c'). Shapes: x [B x d_in], h, c [B x H].
template <typename T>
LstmState<T> lstm_step(const Tensor<T>& x, const Tensor<T>& h, const Tensor<T>& c, const Tensor<T>& w_x,
                       const Tensor<T>& w_h, const Tensor<T>& b, LstmStepCache<T>* cache = nullptr);

template <typename T>
LstmState<T> lstm_step(const ParamSet<T>& params, const LstmLayer& layer, const Tensor<T>& x,
                       const LstmState<T>& state, LstmStepCache<T>* cache = nullptr) {
  return lstm_step(x, state.h, state.c, params.value(layer.w_x), params.value(layer.w_h), params.value(layer.b),
                   cache);
}

template <typename T>
struct LstmBackward {
  Tensor<T> dx, dh_prev, dc_prev;
};

/// Given dL/dh' and dL/dc', accumulates parameter gradients and returns the
/// gradients with respect to x, h and c.
template <typename T>
LstmBackward<T> lstm_step_backward(const LstmStepCache<T>& cache, const Tensor<T>& w_x, const Tensor<T>& w_h,
                                   const Tensor<T>& dh, const Tensor<T>& dc, Tensor<T>& dw_x, Tensor<T>& dw_h,
                                   Tensor<T>& db);

template <typename T>
LstmBackward<T> lstm_step_backward(ParamSet<T>& params, const LstmLayer& layer, const LstmStepCache<T>& cache,
                                   const Tensor<T>& dh, const Tensor<T>& dc) {
  return lstm_step_backward(cache, params.value(layer.w_x), params.value(layer.w_h), dh, dc,
                            params.grad(layer.w_x), params.grad(layer.w_h), params.grad(layer.b));
}

}  // namespace pbt::nn
