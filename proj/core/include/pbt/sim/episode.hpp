#pragma once

#include <optional>

#include "pbt/sim/session.hpp"

namespace pbt::sim {

struct PhaseOutcome {
  RobotAction action;
  double action_time = 0.0;
  double t_b = 0.0;
  double reward = 0.0;
  /// False when the trigger arrived first and the reactive plan ran.
  bool proactive = false;
  bool terminal = true;
};

struct StepResult {
  bool terminal = false;
  double reward = 0.0;
};

/// One phase seen as an episode: a Wait advances one decision interval, any
/// other action ends it. Reaching the trigger ends it with reward 0.
class EpisodeStream {
 public:
  EpisodeStream(const PhaseScript& phase, double window_seconds);

  const PhaseScript& phase() const noexcept { return phase_; }
  std::size_t step_index() const noexcept { return step_; }
  double decision_time() const noexcept { return sim::decision_time(step_, window_); }
  std::size_t total_steps() const noexcept { return total_steps_; }
  bool terminal() const noexcept { return outcome_.has_value(); }
  const std::optional<PhaseOutcome>& outcome() const noexcept { return outcome_; }

  StepResult step(RobotAction action);

 private:
  void finish_at_trigger();

  PhaseScript phase_;
  double window_;
  std::size_t step_ = 0;
  std::size_t total_steps_ = 0;
  std::optional<PhaseOutcome> outcome_;
};

}  // namespace pbt::sim
