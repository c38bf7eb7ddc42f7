#pragma once

#include <map>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

#include "pbt/baselines/classifier.hpp"
#include "pbt/btree/node.hpp"

namespace pbt::baselines {

enum class UncertaintyMethod { Dropout, Bootstrap, Both };
std::string_view method_name(UncertaintyMethod m);
UncertaintyMethod parse_method(std::string_view name);

struct UncertaintySpec {
  UncertaintyMethod method = UncertaintyMethod::Both;
  /// Stochastic dropout passes per model (Dropout and Both).
  std::size_t passes = 20;
};

struct Prediction {
  std::vector<double> probs;  // mean over samples
  std::size_t action = 0;     // argmax of probs
  double uncertainty = 0.0;   // mean over classes of the across-sample variance
};

/// Aggregates sampled class-probability vectors.
Prediction aggregate_samples(std::span<const std::vector<double>> samples);

/// Wait when uncertainty > tau, otherwise the predicted action. tau = +inf is
/// the always-Wait reference.
sim::RobotAction gated_act(double tau, const Prediction& prediction);

/// Ensemble and/or MC-dropout prediction over a phase's window history.
/// Results are memoized per window together with the recurrent states, so
/// several gated policies can share one predictor.
template <typename T>
class EnsemblePredictor {
 public:
  EnsemblePredictor(std::vector<std::shared_ptr<const Classifier<T>>> members, UncertaintySpec spec,
                    repr::Normalizer normalizer, std::shared_ptr<const skeleton::SkeletonGraph> graph,
                    std::uint64_t seed);

  void reset();
  Prediction predict(const btree::WindowObservation& window, const btree::Context& context);

  UncertaintyMethod method() const noexcept { return spec_.method; }
  std::size_t samples_per_window() const noexcept;
  std::size_t computed_windows() const noexcept { return computed_; }

 private:
  struct Entry {
    Prediction prediction;
    std::vector<ClassifierState<T>> states;
  };
  std::vector<std::shared_ptr<const Classifier<T>>> members_;
  UncertaintySpec spec_;
  repr::Normalizer normalizer_;
  std::shared_ptr<const skeleton::SkeletonGraph> graph_;
  std::uint64_t seed_;
  std::vector<ClassifierState<T>> states_;
  std::map<repr::WindowKey, Entry> memo_;
  std::size_t computed_ = 0;
};

template <typename T>
class GatedPolicy final : public btree::DecisionPolicy {
 public:
  GatedPolicy(std::shared_ptr<EnsemblePredictor<T>> predictor, double tau);
  void reset() override { predictor_->reset(); }
  sim::RobotAction decide(const btree::WindowObservation& window, const btree::Context& context) override;

 private:
  std::shared_ptr<EnsemblePredictor<T>> predictor_;
  double tau_;
};

}  // namespace pbt::baselines
