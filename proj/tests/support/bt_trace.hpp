#pragma once

// A single hand-built 4 s phase and a scripted policy, for tick-by-tick
// checks of the packaging tree.

#include <memory>
#include <vector>

#include "pbt/btree/packaging.hpp"
#include "pbt/btree/session_runner.hpp"

namespace pbt::testing {

/// One BubbleWrap phase: 100 frames at 25 fps, cue at 1.2 s, trigger at 4 s.
inline sim::Session four_second_phase() {
  sim::Session s;
  s.fps = 25.0;
  s.script.box_type = 1;
  s.script.position = 1;
  sim::PhaseScript ph;
  ph.kind = {sim::PhaseType::BubbleWrap, 1, 1};
  ph.duration = 4.0;
  ph.cue_onset = 1.2;
  ph.t_trigger = 4.0;
  ph.frame_count = 100;
  s.script.phases.push_back(ph);
  for (std::size_t k = 0; k < ph.frame_count; ++k) {
    skeleton::MotionFrame f;
    f.timestamp = static_cast<double>(k) / s.fps;
    f.joints.assign(15, skeleton::Vec3::Zero());
    s.frames.push_back(std::move(f));
  }
  return s;
}

/// Waits on the first `wait_steps` windows, then picks the correct action.
class ScriptedPolicy final : public btree::DecisionPolicy {
 public:
  ScriptedPolicy(std::size_t wait_steps, sim::RobotAction action) : wait_steps_(wait_steps), action_(action) {}
  void reset() override { calls.clear(); }
  sim::RobotAction decide(const btree::WindowObservation& w, const btree::Context&) override {
    calls.push_back(w.key.step);
    return w.key.step < wait_steps_ ? sim::RobotAction::wait() : action_;
  }
  std::vector<std::uint32_t> calls;

 private:
  std::size_t wait_steps_;
  sim::RobotAction action_;
};

struct TraceResult {
  btree::SessionRun run;
  std::vector<std::uint32_t> policy_calls;
};

/// Ticks once per second through the packaging tree with the scripted policy.
inline TraceResult hand_trace() {
  const auto session = four_second_phase();
  auto policy = std::make_shared<ScriptedPolicy>(2, sim::correct_action(session.script.phases[0].kind));
  btree::Registry reg;
  btree::register_packaging_handles(reg);
  reg.add_policy("drqn", policy);
  auto tree = btree::build_packaging_tree("drqn");
  btree::RunnerOptions opt;
  opt.frames_per_tick = 25;
  opt.record_trace = true;
  TraceResult r{btree::run_session(session, 0, *tree, reg, opt), {}};
  r.policy_calls = policy->calls;
  return r;
}

}  // namespace pbt::testing
