#include "pbt/numcore/adam.hpp"

#include <cmath>

namespace pbt::nn {

template <typename T>
AdamState<T>::AdamState(const ParamSet<T>& params, AdamOptions opts) : options(opts) {
  m.reserve(params.size());
  v.reserve(params.size());
  for (const auto& p : params) {
    m.emplace_back(p.value.shape());
    v.emplace_back(p.value.shape());
  }
}

template <typename T>
void adam_step(ParamSet<T>& params, AdamState<T>& state) {
  require(state.m.size() == params.size(), "adam_step: optimizer state does not match parameter set");
  ++state.step;
  const auto& o = state.options;
  const double bc1 = 1.0 - std::pow(o.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(o.beta2, static_cast<double>(state.step));
  const T b1 = static_cast<T>(o.beta1), b2 = static_cast<T>(o.beta2);
  const T step_size = static_cast<T>(o.learning_rate / bc1);
  const T inv_sqrt_bc2 = static_cast<T>(1.0 / std::sqrt(bc2));
  const T eps = static_cast<T>(o.epsilon);
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& p = params[i];
    require(state.m[i].shape() == p.value.shape(), "adam_step: moment shape mismatch for '" + p.name + "'");
    T* w = p.value.raw();
    const T* g = p.grad.raw();
    T* m = state.m[i].raw();
    T* v = state.v[i].raw();
    for (std::size_t k = 0; k < p.value.size(); ++k) {
      m[k] = b1 * m[k] + (T{1} - b1) * g[k];
      v[k] = b2 * v[k] + (T{1} - b2) * g[k] * g[k];
      w[k] -= step_size * m[k] / (std::sqrt(v[k]) * inv_sqrt_bc2 + eps);
    }
  }
}

template struct AdamState<float>;
template struct AdamState<double>;
template void adam_step(ParamSet<float>&, AdamState<float>&);
template void adam_step(ParamSet<double>&, AdamState<double>&);

}  // namespace pbt::nn
