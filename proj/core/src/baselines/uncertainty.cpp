#include "pbt/baselines/uncertainty.hpp"

#include <algorithm>
#include <cmath>

#include "pbt/numcore/ops.hpp"

namespace pbt::baselines {

std::string_view method_name(UncertaintyMethod m) {
  switch (m) {
    case UncertaintyMethod::Dropout:
      return "dropout";
    case UncertaintyMethod::Bootstrap:
      return "bootstrap";
    case UncertaintyMethod::Both:
      return "combined";
  }
  return "?";
}

UncertaintyMethod parse_method(std::string_view name) {
  if (name == "dropout") return UncertaintyMethod::Dropout;
  if (name == "bootstrap") return UncertaintyMethod::Bootstrap;
  if (name == "combined" || name == "both") return UncertaintyMethod::Both;
  throw FormatError("unknown uncertainty method '" + std::string(name) + "'");
}

Prediction aggregate_samples(std::span<const std::vector<double>> samples) {
  require(!samples.empty(), "aggregate_samples: no samples");
  const std::size_t c = samples.front().size();
  require(c > 0, "aggregate_samples: empty probability vector");
  Prediction p;
  p.probs.assign(c, 0.0);
  for (const auto& s : samples) {
    require(s.size() == c, "aggregate_samples: samples differ in length");
    for (std::size_t i = 0; i < c; ++i) p.probs[i] += s[i];
  }
  const double n = static_cast<double>(samples.size());
  for (auto& v : p.probs) v /= n;
  double var = 0.0;
  for (const auto& s : samples)
    for (std::size_t i = 0; i < c; ++i) var += (s[i] - p.probs[i]) * (s[i] - p.probs[i]);
  p.uncertainty = var / (n * static_cast<double>(c));
  p.action = static_cast<std::size_t>(std::max_element(p.probs.begin(), p.probs.end()) - p.probs.begin());
  return p;
}

sim::RobotAction gated_act(double tau, const Prediction& prediction) {
  require(tau >= 0.0, "gated_act: threshold must be >= 0");
  if (std::isinf(tau) || prediction.uncertainty > tau) return sim::RobotAction::wait();
  return sim::RobotAction::from_index(prediction.action);
}

template <typename T>
EnsemblePredictor<T>::EnsemblePredictor(std::vector<std::shared_ptr<const Classifier<T>>> members,
                                        UncertaintySpec spec, repr::Normalizer normalizer,
                                        std::shared_ptr<const skeleton::SkeletonGraph> graph, std::uint64_t seed)
    : members_(std::move(members)), spec_(spec), normalizer_(std::move(normalizer)), graph_(std::move(graph)),
      seed_(seed) {
  require(!members_.empty(), "EnsemblePredictor: no trained models");
  for (const auto& m : members_) require(m != nullptr, "EnsemblePredictor: untrained model");
  require(graph_ != nullptr && normalizer_.fitted(), "EnsemblePredictor: graph and fitted normalizer required");
  switch (spec_.method) {
    case UncertaintyMethod::Dropout:
      require(members_.size() == 1, "EnsemblePredictor: dropout uses a single model");
      require(spec_.passes >= 2, "EnsemblePredictor: dropout needs at least two passes");
      break;
    case UncertaintyMethod::Bootstrap:
      require(members_.size() >= 2, "EnsemblePredictor: bootstrap needs at least two models");
      break;
    case UncertaintyMethod::Both:
      require(members_.size() >= 2 && spec_.passes >= 2,
              "EnsemblePredictor: combined method needs two or more models and passes");
      break;
  }
  reset();
}

template <typename T>
std::size_t EnsemblePredictor<T>::samples_per_window() const noexcept {
  return members_.size() * (spec_.method == UncertaintyMethod::Bootstrap ? 1 : spec_.passes);
}

template <typename T>
void EnsemblePredictor<T>::reset() {
  states_.clear();
  for (const auto& m : members_) states_.push_back(m->initial_state(1));
}

template <typename T>
Prediction EnsemblePredictor<T>::predict(const btree::WindowObservation& window, const btree::Context& context) {
  if (auto it = memo_.find(window.key); it != memo_.end()) {
    states_ = it->second.states;
    return it->second.prediction;
  }
  const std::vector<std::span<const skeleton::MotionFrame>> spans{window.frames};
  Tensor<T> x = skeleton::to_graph_batch<T>(spans, *graph_);
  normalizer_.apply(x);
  const bool stochastic = spec_.method != UncertaintyMethod::Bootstrap;
  const std::uint64_t key_index = (std::uint64_t{window.key.session} << 32) ^ (std::uint64_t{window.key.phase} << 16) ^
                                  std::uint64_t{window.key.step};
  Rng rng(derive_seed(seed_, "mc-dropout", key_index));
  std::vector<std::vector<double>> samples;
  for (std::size_t m = 0; m < members_.size(); ++m) {
    const auto& model = *members_[m];
    const Tensor<T> hidden = model.step(model.features(x), std::span(&context, 1), states_[m]);
    for (std::size_t j = 0; j < (stochastic ? spec_.passes : 1); ++j) {
      Tensor<T> mask;
      if (stochastic) nn::dropout_forward(hidden, model.config().dropout, rng, mask);
      const Tensor<T> p = model.probabilities(hidden, stochastic ? &mask : nullptr);
      samples.emplace_back(p.values().begin(), p.values().end());
    }
  }
  ++computed_;
  Prediction pred = aggregate_samples(samples);
  memo_.emplace(window.key, Entry{pred, states_});
  return pred;
}

template <typename T>
GatedPolicy<T>::GatedPolicy(std::shared_ptr<EnsemblePredictor<T>> predictor, double tau)
    : predictor_(std::move(predictor)), tau_(tau) {
  require(predictor_ != nullptr, "GatedPolicy: null predictor");
  require(tau_ >= 0.0, "GatedPolicy: threshold must be >= 0");
}

template <typename T>
sim::RobotAction GatedPolicy<T>::decide(const btree::WindowObservation& window, const btree::Context& context) {
  return gated_act(tau_, predictor_->predict(window, context));
}

template class EnsemblePredictor<float>;
template class EnsemblePredictor<double>;
template class GatedPolicy<float>;
template class GatedPolicy<double>;

}  // namespace pbt::baselines
