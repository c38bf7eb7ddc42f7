#pragma once

#include <span>

#include "pbt/drqn/qnet.hpp"
#include "pbt/drqn/replay.hpp"

namespace pbt::drqn {

/// Mean squared TD error over the batch:
///   y = r                                   for terminal experiences
///   y = r + gamma * max_a' Q_target(seq_{i+1}, a')  otherwise
/// Sequences are unrolled from the episode start; the target is detached.
/// With accumulate_grads, d(loss)/d(online) is added to online's gradients.
template <typename T>
double td_loss(const QNet<T>& net, ParamSet<T>& online, const ParamSet<T>& target,
               std::span<const ExperienceRef<T>> batch, double gamma, bool accumulate_grads);

}  // namespace pbt::drqn
