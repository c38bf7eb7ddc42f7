#include "pbt/sim/episode.hpp"

#include <algorithm>

#include "pbt/common.hpp"
#include "pbt/sim/reward.hpp"

namespace pbt::sim {

EpisodeStream::EpisodeStream(const PhaseScript& phase, double window_seconds)
    : phase_(phase), window_(window_seconds) {
  phase_.validate();
  require(window_seconds > 0.0, "EpisodeStream: window length must be positive");
  total_steps_ = decision_steps(phase_, window_);
  if (total_steps_ == 0) finish_at_trigger();
}

void EpisodeStream::finish_at_trigger() {
  outcome_ = PhaseOutcome{correct_action(phase_.kind), phase_.t_trigger, 0.0, 0.0, false, true};
}

StepResult EpisodeStream::step(RobotAction action) {
  require(!terminal(), "EpisodeStream::step: episode already terminated");
  if (action.is_wait()) {
    ++step_;
    if (step_ >= total_steps_) {
      finish_at_trigger();
      return {true, 0.0};
    }
    return {false, 0.0};
  }
  const double t = decision_time();
  const double t_b = std::max(0.0, phase_.t_trigger - t);
  const double r = compute_reward(phase_.kind, action, t_b);
  outcome_ = PhaseOutcome{action, t, t_b, r, true, true};
  return {true, r};
}

}  // namespace pbt::sim
