#include "pbt/drqn/trainer.hpp"

#include <cmath>

#include "pbt/drqn/policy.hpp"
#include "pbt/drqn/td_loss.hpp"
#include "pbt/numcore/adam.hpp"

namespace pbt::drqn {

void TrainConfig::validate() const {
  require(gamma >= 0.0 && gamma <= 1.0, "drqn: gamma must lie in [0, 1]");
  require(epsilon_start >= 0.0 && epsilon_start <= 1.0 && epsilon_end >= 0.0 && epsilon_end <= 1.0,
          "drqn: epsilon must lie in [0, 1]");
  require(batch_size >= 1, "drqn: batch size must be >= 1");
  require(replay_capacity >= 1, "drqn: replay capacity must be >= 1");
  require(learning_rate > 0.0, "drqn: learning rate must be positive");
  require(max_episode_steps >= 1, "drqn: max episode steps must be >= 1");
}

double TrainConfig::epsilon_at(std::size_t iteration) const {
  return linear_epsilon(iteration, epsilon_start, epsilon_end, epsilon_decay_iterations);
}

template <typename T>
EvalSummary evaluate_greedy(const QNet<T>& net, Environment& env, double min_value) {
  EvalSummary s;
  const std::size_t n = env.eval_episode_count();
  require(n > 0, "evaluate_greedy: environment has no evaluation episodes");
  std::size_t acted = 0;
  for (std::size_t i = 0; i < n; ++i) {
    env.reset_eval(i);
    const auto ep = rollout(net, env, 100000, [&](std::span<const T> q) { return gated_greedy_action(q, min_value); });
    s.rewards.push_back(ep->rewards.back());
    acted += ep->actions.back() != 0;
  }
  double sum = 0.0;
  for (double r : s.rewards) sum += r;
  s.mean_reward = sum / static_cast<double>(n);
  double var = 0.0;
  for (double r : s.rewards) var += (r - s.mean_reward) * (r - s.mean_reward);
  s.std_reward = std::sqrt(var / static_cast<double>(n));
  s.act_rate = static_cast<double>(acted) / static_cast<double>(n);
  return s;
}

template <typename T>
TrainedQNet<T> train_drqn(Environment& env, const QNetConfig& net_cfg, const TrainConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  require(net_cfg.input_dim == env.observation_dim() && net_cfg.actions == env.action_count(),
          "train_drqn: network shape does not match the environment");
  TrainedQNet<T> out{QNet<T>(net_cfg, seed), {}, {}};
  QNet<T>& net = out.net;
  ParamSet<T> target = net.params();
  nn::AdamState<T> adam(net.params(), nn::AdamOptions{cfg.learning_rate});
  ReplayBuffer<T> replay(cfg.replay_capacity);
  Rng env_rng(derive_seed(seed, "drqn-env"));
  Rng act_rng(derive_seed(seed, "drqn-act"));
  Rng replay_rng(derive_seed(seed, "drqn-replay"));

  for (std::size_t it = 0; it < cfg.iterations; ++it) {
    const double eps = cfg.epsilon_at(it);
    for (std::size_t e = 0; e < cfg.episodes_per_iteration; ++e) {
      env.reset_train(env_rng);
      replay.add_episode(rollout(net, env, cfg.max_episode_steps,
                                 [&](std::span<const T> q) { return act_epsilon_greedy(q, eps, act_rng); }));
    }
    double td = 0.0;
    if (replay.size() > 0) {
      for (std::size_t u = 0; u < cfg.updates_per_iteration; ++u) {
        const auto batch = replay.sample(cfg.batch_size, replay_rng);
        net.params().zero_grads();
        td += td_loss(net, net.params(), target, std::span<const ExperienceRef<T>>(batch), cfg.gamma, true);
        nn::adam_step(net.params(), adam);
      }
      if (cfg.updates_per_iteration) td /= static_cast<double>(cfg.updates_per_iteration);
    }
    target.copy_values_from(net.params());

    const bool last = it + 1 == cfg.iterations;
    if (cfg.eval_interval && ((it + 1) % cfg.eval_interval == 0 || last)) {
      const EvalSummary ev = evaluate_greedy(net, env, cfg.eval_min_value);
      out.curve.push_back({it, ev.mean_reward, ev.std_reward, eps, td});
    }
  }
  out.target = std::move(target);
  return out;
}

template EvalSummary evaluate_greedy(const QNet<float>&, Environment&, double);
template EvalSummary evaluate_greedy(const QNet<double>&, Environment&, double);
template TrainedQNet<float> train_drqn(Environment&, const QNetConfig&, const TrainConfig&, std::uint64_t);
template TrainedQNet<double> train_drqn(Environment&, const QNetConfig&, const TrainConfig&, std::uint64_t);

}  // namespace pbt::drqn
