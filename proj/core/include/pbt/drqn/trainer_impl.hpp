#pragma once

#include <algorithm>
#include <memory>
#include <span>

namespace pbt::drqn {

template <typename T, typename Rule>
std::shared_ptr<Episode<T>> rollout(const QNet<T>& net, Environment& env, std::size_t max_steps, Rule&& rule) {
  const std::size_t dim = env.observation_dim();
  require(dim == net.config().input_dim, "rollout: environment observation width " + std::to_string(dim) +
                                             " does not match network input " +
                                             std::to_string(net.config().input_dim));
  auto ep = std::make_shared<Episode<T>>();
  std::vector<double> obs(dim);
  std::vector<T> rows;
  Tensor<T> x({1, dim});
  QState<T> state = net.initial_state(1);
  for (std::size_t t = 0;; ++t) {
    require(t < max_steps, "rollout: episode exceeded " + std::to_string(max_steps) + " steps");
    env.observe(obs);
    for (std::size_t i = 0; i < dim; ++i) x[i] = static_cast<T>(obs[i]);
    rows.insert(rows.end(), x.values().begin(), x.values().end());
    const Tensor<T> q = net.step(x, state);
    const std::size_t a = rule(std::span<const T>(q.raw(), q.size()));
    const EnvStep r = env.step(a);
    ep->actions.push_back(a);
    ep->rewards.push_back(r.terminal ? r.reward : 0.0);
    if (r.terminal) break;
  }
  ep->inputs = Tensor<T>({ep->length(), dim}, std::move(rows));
  return ep;
}

}  // namespace pbt::drqn
