#include "pbt/drqn/policy.hpp"

#include <algorithm>
#include <random>

#include "pbt/common.hpp"

namespace pbt::drqn {

template <typename T>
std::size_t greedy_action(std::span<const T> values) {
  require(!values.empty(), "greedy_action: no action values");
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i)
    if (values[i] > values[best]) best = i;
  return best;
}

template <typename T>
std::size_t act_epsilon_greedy(std::span<const T> values, double epsilon, Rng& rng) {
  require(epsilon >= 0.0 && epsilon <= 1.0, "act_epsilon_greedy: epsilon must lie in [0, 1]");
  require(!values.empty(), "act_epsilon_greedy: no action values");
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  if (unit(rng) < epsilon) {
    std::uniform_int_distribution<std::size_t> pick(0, values.size() - 1);
    return pick(rng);
  }
  return greedy_action(values);
}

template <typename T>
std::size_t gated_greedy_action(std::span<const T> values, double min_value) {
  const std::size_t a = greedy_action(values);
  if (a != 0 && static_cast<double>(values[a]) > min_value) return a;
  return 0;
}

double linear_epsilon(std::size_t iteration, double epsilon_start, double epsilon_end, std::size_t decay_iterations) {
  if (decay_iterations == 0) return epsilon_end;
  const double f = std::min(1.0, static_cast<double>(iteration) / static_cast<double>(decay_iterations));
  return epsilon_start + (epsilon_end - epsilon_start) * f;
}

template std::size_t greedy_action(std::span<const float>);
template std::size_t greedy_action(std::span<const double>);
template std::size_t act_epsilon_greedy(std::span<const float>, double, Rng&);
template std::size_t act_epsilon_greedy(std::span<const double>, double, Rng&);
template std::size_t gated_greedy_action(std::span<const float>, double);
template std::size_t gated_greedy_action(std::span<const double>, double);

}  // namespace pbt::drqn
