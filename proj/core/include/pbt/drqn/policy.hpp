#pragma once

#include <cstddef>
#include <limits>
#include <span>

#include "pbt/numcore/rng.hpp"

namespace pbt::drqn {

/// Index of the largest value; ties resolve to the lowest index (Wait).
template <typename T>
std::size_t greedy_action(std::span<const T> values);

/// With probability epsilon a uniformly random action, otherwise greedy.
/// Always consumes one uniform draw, plus one more when exploring.
template <typename T>
std::size_t act_epsilon_greedy(std::span<const T> values, double epsilon, Rng& rng);

/// Greedy action gated by an activation threshold: a non-Wait argmax is only
/// taken when its value exceeds min_value; otherwise Wait (index 0).
template <typename T>
std::size_t gated_greedy_action(std::span<const T> values,
                                double min_value = -std::numeric_limits<double>::infinity());

/// epsilon_start -> epsilon_end linearly over decay_iterations, then constant.
double linear_epsilon(std::size_t iteration, double epsilon_start, double epsilon_end, std::size_t decay_iterations);

}  // namespace pbt::drqn
