#pragma once

#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "pbt/btree/context.hpp"
#include "pbt/drqn/environment.hpp"
#include "pbt/repr/train.hpp"
#include "pbt/sim/episode.hpp"

namespace pbt::drqn {

/// Precomputed encoder outputs for every window of a set of sessions.
struct LatentTable {
  std::size_t latent_dim = 0;
  std::vector<double> values;  // row-major [windows x latent_dim]
  /// first_row[session][phase] is the row of window 0 of that phase.
  std::vector<std::vector<std::size_t>> first_row;

  std::span<const double> latent(std::size_t session, std::size_t phase, std::size_t step) const;
};

/// Gathers per-window latents [N x L] listed in dataset order by `keys`.
template <typename T>
LatentTable make_latent_table(std::span<const repr::WindowKey> keys, const nn::Tensor<T>& latents,
                              std::span<const sim::Session> sessions);

/// Phase episodes over synthetic sessions: the observation at decision step k
/// is the latent of window k concatenated with the BT context of the phase.
class PackagingEnv final : public Environment {
 public:
  PackagingEnv(std::shared_ptr<const std::vector<sim::Session>> train_sessions, std::shared_ptr<const LatentTable> train_latents,
               std::shared_ptr<const std::vector<sim::Session>> eval_sessions, std::shared_ptr<const LatentTable> eval_latents);

  std::size_t observation_dim() const override { return latent_dim_ + btree::kContextDim; }
  std::size_t action_count() const override { return sim::RobotAction::kCount; }
  void reset_train(Rng& rng) override;
  std::size_t eval_episode_count() const override { return eval_index_.size(); }
  void reset_eval(std::size_t i) override;
  void observe(std::span<double> out) const override;
  EnvStep step(std::size_t action) override;

  const sim::EpisodeStream& episode() const;

 private:
  struct Source {
    std::shared_ptr<const std::vector<sim::Session>> sessions;
    std::shared_ptr<const LatentTable> latents;
  };
  void begin(const Source& src, std::size_t session, std::size_t phase);

  Source train_, eval_;
  std::size_t latent_dim_ = 0;
  std::vector<std::pair<std::size_t, std::size_t>> eval_index_;
  // current episode
  const Source* src_ = nullptr;
  std::size_t session_ = 0, phase_ = 0;
  std::optional<sim::EpisodeStream> stream_;
  btree::Context context_{};
  // training cursor: phases of one randomly chosen session in order
  std::size_t train_session_ = 0, train_next_phase_ = 0;
  bool train_started_ = false;
};

}  // namespace pbt::drqn
