#pragma once

#include "pbt/sim/types.hpp"

namespace pbt::sim {

/// Reward (seconds) for dispatching `action` with time-saved margin t_b:
///
///   BoxDelivery  right item, right position   min(t_b, 4.0)
///                right item, wrong position   min(t_b, 3.5)
///                wrong item                   max(-t_b, -3.5)
///                lift the box                 max(-t_b, -4.5)
///   BubbleWrap   right item                   min(t_b, 3.5)
///                wrong item                   max(-t_b, -3.5)
///                lift the box                 max(-t_b, -4.5)
///   WrapUp       lift the box                 min(t_b, 4.5)
///                any item                     max(-t_b, -3.5)
///
/// Throws ContractViolation for Wait or negative t_b.
double compute_reward(const PhaseKind& phase, RobotAction action, double t_b);

inline constexpr double kMaxAbsReward = 4.5;

}  // namespace pbt::sim
