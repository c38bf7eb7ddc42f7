#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "pbt/drqn/environment.hpp"
#include "pbt/drqn/qnet.hpp"
#include "pbt/drqn/replay.hpp"

namespace pbt::drqn {

struct TrainConfig {
  double gamma = 0.99;
  std::size_t iterations = 100;
  std::size_t updates_per_iteration = 50;
  std::size_t batch_size = 128;
  double epsilon_start = 1.0;
  double epsilon_end = 0.05;
  std::size_t epsilon_decay_iterations = 50;
  std::size_t episodes_per_iteration = 120;
  std::size_t replay_capacity = 20000;
  double learning_rate = 1e-3;
  /// Activation threshold used by the greedy evaluation policy.
  double eval_min_value = 0.0;
  /// Evaluate every n-th iteration (and always the last one); 0 disables.
  std::size_t eval_interval = 1;
  std::size_t max_episode_steps = 1000;

  void validate() const;
  double epsilon_at(std::size_t iteration) const;
};

struct CurvePoint {
  std::size_t iteration = 0;
  double mean_reward = 0.0;
  double std_reward = 0.0;
  double epsilon = 0.0;
  double mean_td_loss = 0.0;
};

struct EvalSummary {
  double mean_reward = 0.0;
  double std_reward = 0.0;
  double act_rate = 0.0;  // fraction of episodes ended by a non-Wait action
  std::vector<double> rewards;
};

template <typename T>
struct TrainedQNet {
  QNet<T> net;
  /// Target parameters after the final sync.
  ParamSet<T> target;
  std::vector<CurvePoint> curve;
};

/// Greedy (gated) policy on every evaluation episode of env.
template <typename T>
EvalSummary evaluate_greedy(const QNet<T>& net, Environment& env, double min_value);

/// Recurrent DQN: per iteration collect episodes with epsilon-greedy, run
/// minibatch TD updates with Adam, then copy the online parameters into the
/// target network and evaluate.
template <typename T>
TrainedQNet<T> train_drqn(Environment& env, const QNetConfig& net_cfg, const TrainConfig& cfg, std::uint64_t seed);

/// Runs one episode with the given action rule, recording it for replay.
template <typename T, typename Rule>
std::shared_ptr<Episode<T>> rollout(const QNet<T>& net, Environment& env, std::size_t max_steps, Rule&& rule);

}  // namespace pbt::drqn

#include "pbt/drqn/trainer_impl.hpp"
