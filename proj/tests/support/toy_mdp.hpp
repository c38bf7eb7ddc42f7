#pragma once

// Small fully observable chain MDP with tabular value iteration, used as an
// independent oracle for the recurrent Q-learner.

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include "pbt/drqn/environment.hpp"
#include "pbt/drqn/trainer.hpp"

namespace pbt::testing {

struct Transition {
  std::optional<std::size_t> next;  // nullopt: terminal
  double reward = 0.0;
};

/// s0 --a0--> s1 --a0--> s2 --a0--> end(+3)
///  |a1 end(+1)  |a1 end(+0.5) |a1 end(+2)
struct ChainMdp {
  static constexpr std::size_t kStates = 3;
  static constexpr std::size_t kActions = 2;
  std::array<std::array<Transition, kActions>, kStates> table{{
      {{{1, 0.0}, {std::nullopt, 1.0}}},
      {{{2, 0.0}, {std::nullopt, 0.5}}},
      {{{std::nullopt, 3.0}, {std::nullopt, 2.0}}},
  }};
};

using QTable = std::array<std::array<double, ChainMdp::kActions>, ChainMdp::kStates>;

/// Bellman optimality iteration to a fixed point.
inline QTable value_iteration(const ChainMdp& mdp, double gamma, double tol = 1e-12) {
  QTable q{};
  for (int it = 0; it < 10000; ++it) {
    QTable next{};
    double delta = 0.0;
    for (std::size_t s = 0; s < ChainMdp::kStates; ++s)
      for (std::size_t a = 0; a < ChainMdp::kActions; ++a) {
        const Transition& t = mdp.table[s][a];
        double v = t.reward;
        if (t.next) v += gamma * std::max(q[*t.next][0], q[*t.next][1]);
        next[s][a] = v;
        delta = std::max(delta, std::abs(v - q[s][a]));
      }
    q = next;
    if (delta < tol) break;
  }
  return q;
}

/// One-hot observations; every episode starts in s0.
class ChainEnv final : public drqn::Environment {
 public:
  explicit ChainEnv(ChainMdp mdp = {}) : mdp_(mdp) {}
  std::size_t observation_dim() const override { return ChainMdp::kStates; }
  std::size_t action_count() const override { return ChainMdp::kActions; }
  void reset_train(Rng&) override { state_ = 0; }
  std::size_t eval_episode_count() const override { return 1; }
  void reset_eval(std::size_t) override { state_ = 0; }
  void observe(std::span<double> out) const override {
    std::fill(out.begin(), out.end(), 0.0);
    out[state_] = 1.0;
  }
  drqn::EnvStep step(std::size_t action) override {
    const Transition& t = mdp_.table.at(state_).at(action);
    if (t.next) {
      state_ = *t.next;
      return {t.reward, false};
    }
    return {t.reward, true};
  }

 private:
  ChainMdp mdp_;
  std::size_t state_ = 0;
};

struct ChainResult {
  QTable q{};         // learned values along the only path s0 -> s1 -> s2
  QTable q_star{};
  double max_abs_error = 0.0;
  bool same_policy = false;
};

/// Trains the recurrent Q-network on the chain and compares with value iteration.
inline ChainResult train_chain(std::uint64_t seed, double gamma = 0.9) {
  ChainEnv env;
  drqn::TrainConfig tc;
  tc.gamma = gamma;
  tc.iterations = 100;
  tc.updates_per_iteration = 20;
  tc.batch_size = 32;
  tc.episodes_per_iteration = 10;
  tc.epsilon_decay_iterations = 50;
  tc.epsilon_end = 0.1;
  tc.replay_capacity = 5000;
  tc.learning_rate = 3e-3;
  tc.eval_min_value = -std::numeric_limits<double>::infinity();
  tc.eval_interval = tc.iterations;
  const auto trained = drqn::train_drqn<double>(env, {ChainMdp::kStates, 16, ChainMdp::kActions}, tc, seed);

  nn::Tensor<double> path({ChainMdp::kStates, ChainMdp::kStates});
  for (std::size_t s = 0; s < ChainMdp::kStates; ++s) path(s, s) = 1.0;
  const auto q = trained.net.unroll(trained.net.params(), path);
  ChainResult r;
  r.q_star = value_iteration({}, gamma);
  r.same_policy = true;
  for (std::size_t s = 0; s < ChainMdp::kStates; ++s) {
    for (std::size_t a = 0; a < ChainMdp::kActions; ++a) {
      r.q[s][a] = q(s, a);
      r.max_abs_error = std::max(r.max_abs_error, std::abs(q(s, a) - r.q_star[s][a]));
    }
    r.same_policy &= (r.q[s][0] > r.q[s][1]) == (r.q_star[s][0] > r.q_star[s][1]);
  }
  return r;
}

}  // namespace pbt::testing
