#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "pbt/numcore/tensor.hpp"

namespace pbt::nn {

struct ParamId {
  std::size_t index = 0;
};

template <typename T>
struct Param {
  std::string name;
  Tensor<T> value;
  Tensor<T> grad;
};

/// Named parameters, each paired with a gradient buffer of identical shape.
/// Models refer to parameters by ParamId so a ParamSet can be copied (e.g. to
/// form a target network) without invalidating the model structure.
template <typename T>
class ParamSet {
 public:
  ParamId add(std::string name, Tensor<T> init) {
    require(!find(name).has_value(), "duplicate parameter name '" + name + "'");
    Tensor<T> grad(init.shape());
    params_.push_back(Param<T>{std::move(name), std::move(init), std::move(grad)});
    return ParamId{params_.size() - 1};
  }

  Tensor<T>& value(ParamId id) { return params_.at(id.index).value; }
  const Tensor<T>& value(ParamId id) const { return params_.at(id.index).value; }
  Tensor<T>& grad(ParamId id) { return params_.at(id.index).grad; }
  const Tensor<T>& grad(ParamId id) const { return params_.at(id.index).grad; }

  std::size_t size() const noexcept { return params_.size(); }
  Param<T>& operator[](std::size_t i) { return params_[i]; }
  const Param<T>& operator[](std::size_t i) const { return params_[i]; }
  auto begin() { return params_.begin(); }
  auto end() { return params_.end(); }
  auto begin() const { return params_.begin(); }
  auto end() const { return params_.end(); }

  std::optional<ParamId> find(const std::string& name) const {
    for (std::size_t i = 0; i < params_.size(); ++i)
      if (params_[i].name == name) return ParamId{i};
    return std::nullopt;
  }

  void zero_grads() {
    for (auto& p : params_) p.grad.set_zero();
  }

  std::size_t scalar_count() const {
    std::size_t n = 0;
    for (const auto& p : params_) n += p.value.size();
    return n;
  }

  /// Copies values only (gradients of the destination are left untouched).
  void copy_values_from(const ParamSet& other) {
    require(other.size() == size(), "copy_values_from: parameter count mismatch");
    for (std::size_t i = 0; i < params_.size(); ++i) {
      require(params_[i].value.shape() == other.params_[i].value.shape(),
              "copy_values_from: shape mismatch for '" + params_[i].name + "'");
      params_[i].value = other.params_[i].value;
    }
  }

  template <typename U>
  ParamSet<U> cast() const {
    ParamSet<U> out;
    for (const auto& p : params_) out.add(p.name, tensor_cast<U>(p.value));
    return out;
  }

  bool values_equal(const ParamSet& other) const {
    if (other.size() != size()) return false;
    for (std::size_t i = 0; i < params_.size(); ++i)
      if (!(params_[i].value == other.params_[i].value)) return false;
    return true;
  }

 private:
  std::vector<Param<T>> params_;
};

/// Fills w with uniform(-1/sqrt(fan_in), +1/sqrt(fan_in)).
template <typename T, typename Rng>
void init_uniform_fan_in(Tensor<T>& w, std::size_t fan_in, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (auto& v : w.data()) v = static_cast<T>(dist(rng));
}

template <typename T, typename Rng>
Tensor<T> uniform_fan_in(Shape shape, std::size_t fan_in, Rng& rng) {
  Tensor<T> w(std::move(shape));
  init_uniform_fan_in(w, fan_in, rng);
  return w;
}

/// He-uniform for layers followed by ReLU: uniform(-sqrt(6/fan_in), +sqrt(6/fan_in)).
template <typename T, typename Rng>
Tensor<T> he_uniform(Shape shape, std::size_t fan_in, Rng& rng) {
  Tensor<T> w(std::move(shape));
  const double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (auto& v : w.data()) v = static_cast<T>(dist(rng));
  return w;
}

}  // namespace pbt::nn
