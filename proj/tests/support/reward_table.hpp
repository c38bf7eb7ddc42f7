#pragma once

// The nine reward rows written out by hand with their signed caps.

#include <array>

#include "pbt/sim/episode.hpp"
#include "pbt/sim/reward.hpp"

namespace pbt::testing {

struct RewardRow {
  sim::PhaseKind phase;
  sim::RobotAction action;
  double cap;  // signed
  const char* what;
};

inline std::array<RewardRow, 9> reward_rows() {
  using sim::PhaseType;
  using sim::RobotAction;
  const sim::PhaseKind box{PhaseType::BoxDelivery, 1, 1};
  const sim::PhaseKind bubble{PhaseType::BubbleWrap, 1, 1};
  const sim::PhaseKind wrap{PhaseType::WrapUp, 1, 1};
  return {{
      {box, RobotAction::pick(1, 1), 4.0, "box: right item, right position"},
      {box, RobotAction::pick(1, 2), 3.5, "box: right item, wrong position"},
      {box, RobotAction::pick(2, 1), -3.5, "box: wrong item"},
      {bubble, RobotAction::pick(1, 2), 3.5, "bubble: right item"},
      {bubble, RobotAction::pick(2, 2), -3.5, "bubble: wrong item"},
      {bubble, RobotAction::lift_box(), -4.5, "bubble: lift box"},
      {wrap, RobotAction::lift_box(), 4.5, "wrap-up: lift box"},
      {wrap, RobotAction::pick(1, 1), -3.5, "wrap-up: pick item"},
      {box, RobotAction::lift_box(), -4.5, "box: lift box"},
  }};
}

/// Reward of a phase in which the agent waits at every decision step.
inline double wait_to_trigger(const sim::PhaseScript& phase, double window_seconds = 1.0) {
  sim::EpisodeStream ep(phase, window_seconds);
  while (!ep.terminal()) ep.step(sim::RobotAction::wait());
  return ep.outcome()->reward;
}

}  // namespace pbt::testing
