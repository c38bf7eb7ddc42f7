#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "pbt/btree/context.hpp"
#include "pbt/numcore/lstm.hpp"
#include "pbt/repr/normalizer.hpp"
#include "pbt/repr/trunk.hpp"
#include "pbt/sim/session.hpp"

namespace pbt::baselines {

using nn::ParamId;
using nn::ParamSet;
using nn::Tensor;

struct ClassifierConfig {
  repr::TrunkConfig trunk;
  std::size_t feature_dim = 32;
  std::size_t lstm_hidden = 32;
  std::size_t dense_hidden = 32;
  /// Dropout on the input of the final dense layer.
  double dropout = 0.5;
  std::size_t classes = sim::RobotAction::kCount;
  std::size_t epochs = 6;
  /// Phase sequences per minibatch.
  std::size_t batch_phases = 16;
  double learning_rate = 1e-3;

  void validate() const;
};

/// One sequence per phase over its decision windows, labelled Wait until the
/// cue and the phase's correct action afterwards.
template <typename T>
struct PhaseSequences {
  Tensor<T> windows;  // normalized [N x 25 x J x 6]
  std::vector<std::size_t> first;
  std::vector<std::size_t> length;
  std::vector<btree::Context> context;
  std::vector<int> labels;  // per window row

  std::size_t size() const noexcept { return first.size(); }
  void validate() const;
};

template <typename T>
PhaseSequences<T> build_phase_sequences(std::span<const sim::Session> sessions, const skeleton::SkeletonGraph& graph,
                                        const repr::Normalizer& normalizer);

/// Resample of whole sequences (with replacement).
template <typename T>
PhaseSequences<T> select_sequences(const PhaseSequences<T>& data, std::span<const std::size_t> rows);

template <typename T>
using ClassifierState = nn::LstmState<T>;

struct ClassifierEpoch {
  double loss = 0.0;
  double accuracy = 0.0;
};

template <typename T>
class Classifier {
 public:
  Classifier() = default;
  Classifier(const ClassifierConfig& cfg, const skeleton::SkeletonGraph& graph, std::uint64_t seed);

  const ClassifierConfig& config() const noexcept { return cfg_; }
  ParamSet<T>& params() noexcept { return params_; }
  const ParamSet<T>& params() const noexcept { return params_; }

  ClassifierState<T> initial_state(std::size_t batch) const;
  /// Per-window features [B x feature_dim] from normalized windows.
  Tensor<T> features(const Tensor<T>& windows) const;
  /// One recurrent step on features [B x F] and contexts; returns the input
  /// of the dropout unit [B x dense_hidden].
  Tensor<T> step(const Tensor<T>& features, std::span<const btree::Context> contexts, ClassifierState<T>& state) const;
  /// Class probabilities from the dropout-unit input; mask may be null (no dropout).
  Tensor<T> probabilities(const Tensor<T>& hidden, const Tensor<T>* mask) const;

  /// Mean cross-entropy over every labelled step of the selected sequences,
  /// with dropout active. Accumulates gradients when asked.
  double loss(const PhaseSequences<T>& data, std::span<const std::size_t> seqs, Rng& dropout_rng,
              bool accumulate_grads, std::size_t* correct = nullptr);

 private:
  ClassifierConfig cfg_;
  ParamSet<T> params_;
  repr::Trunk<T> trunk_;
  nn::LstmLayer lstm_;
  ParamId wf_, bf_, w1_, b1_, w2_, b2_;
};

/// Cross-entropy training with Adam; shuffles sequences each epoch.
template <typename T>
std::vector<ClassifierEpoch> fit_classifier(Classifier<T>& model, const PhaseSequences<T>& data, std::uint64_t seed);

template <typename T>
Classifier<T> train_classifier(const PhaseSequences<T>& data, const skeleton::SkeletonGraph& graph,
                               const ClassifierConfig& cfg, std::uint64_t seed);

/// K models, each trained on a same-size resample of the sequences.
template <typename T>
std::vector<Classifier<T>> train_bootstrap(const PhaseSequences<T>& data, const skeleton::SkeletonGraph& graph,
                                           const ClassifierConfig& cfg, std::size_t k, std::uint64_t seed);

/// Fraction of labelled steps after the cue whose argmax (no dropout) is correct.
template <typename T>
double post_cue_accuracy(const Classifier<T>& model, const PhaseSequences<T>& data);

}  // namespace pbt::baselines
