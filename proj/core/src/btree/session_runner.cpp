#include "pbt/btree/session_runner.hpp"

#include <algorithm>
#include <cmath>

#include "pbt/btree/context.hpp"
#include "pbt/common.hpp"
#include "pbt/sim/reward.hpp"

namespace pbt::btree {

double SessionRun::total_reward() const {
  double s = 0.0;
  for (const auto& p : phases) s += p.outcome.reward;
  return s;
}

double SessionRun::mean_reward() const {
  return phases.empty() ? 0.0 : total_reward() / static_cast<double>(phases.size());
}

namespace {

sim::PhaseOutcome outcome_without_window(const sim::PhaseScript& ph, const Blackboard& bb) {
  if (bb.dispatch_time >= ph.t_trigger - 1e-9) return {*bb.dispatched, bb.dispatch_time, 0.0, 0.0, false, true};
  const double t_b = ph.t_trigger - bb.dispatch_time;
  return {*bb.dispatched, bb.dispatch_time, t_b, sim::compute_reward(ph.kind, *bb.dispatched, t_b), true, true};
}

}  // namespace

SessionRun run_session(const sim::Session& session, std::uint32_t session_index, Node& root, const Registry& registry,
                       const RunnerOptions& options) {
  require(options.frames_per_tick >= 1 && sim::kWindowFrames % options.frames_per_tick == 0,
          "run_session: frames per tick must divide the window length");
  require(options.action_ticks >= 1, "run_session: actions take at least one tick");
  SessionRun run;
  const double w = session.window_seconds();
  TaskState task;
  for (std::size_t p = 0; p < session.script.phases.size(); ++p) {
    const auto& ph = session.script.phases[p];
    registry.reset_policies();
    sim::EpisodeStream stream(ph, w);
    Blackboard bb;
    bb.task = task;
    bb.phase = ph.kind;
    bb.t_trigger = ph.t_trigger;
    bb.action_ticks = options.action_ticks;

    PhaseRun pr;
    std::optional<sim::PhaseOutcome> outcome;
    for (std::size_t k = options.frames_per_tick; k <= ph.frame_count; k += options.frames_per_tick) {
      bb.time = static_cast<double>(k) / session.fps;
      bb.window.reset();
      if (k % sim::kWindowFrames == 0 && !stream.terminal()) {
        const std::size_t step = k / sim::kWindowFrames - 1;
        if (step == stream.step_index())
          bb.window = WindowObservation{{session_index, static_cast<std::uint32_t>(p), static_cast<std::uint32_t>(step)},
                                        session.window(p, step)};
      }
      const bool had_action = bb.dispatched.has_value();
      const NodeStatus status = root.tick(bb, registry);
      ++pr.ticks;
      if (options.record_trace) run.trace.push_back({p, bb.time, bb.window.has_value(), status});

      const bool dispatched_now = !had_action && bb.dispatched;
      if (dispatched_now) {
        pr.actor = bb.dispatched_by;
        if (bb.window && !stream.terminal()) {
          stream.step(*bb.dispatched);
          outcome = *stream.outcome();
        } else {
          outcome = outcome_without_window(ph, bb);
        }
      } else if (bb.window && !stream.terminal()) {
        stream.step(sim::RobotAction::wait());
      }
      require(status != NodeStatus::Failure || !dispatched_now, "run_session: a failing tick dispatched an action");
      if (bb.dispatched && status == NodeStatus::Success) break;
    }
    if (!outcome) {
      // Nothing acted: the phase plays out to the trigger with no time saved.
      outcome = sim::PhaseOutcome{sim::correct_action(ph.kind), ph.t_trigger, 0.0, 0.0, false, true};
    }
    pr.outcome = *outcome;
    for (auto& d : bb.diagnostics) run.diagnostics.push_back(std::move(d));
    run.phases.push_back(std::move(pr));
    complete_phase(task, ph.kind);
  }
  return run;
}

TreeEvaluation evaluate_tree(Node& root, const Registry& registry, std::span<const sim::Session> sessions,
                             const RunnerOptions& options) {
  require(!sessions.empty(), "evaluate_tree: no sessions");
  TreeEvaluation ev;
  std::size_t acted = 0, wrong = 0;
  for (std::size_t s = 0; s < sessions.size(); ++s) {
    const SessionRun run = run_session(sessions[s], static_cast<std::uint32_t>(s), root, registry, options);
    for (std::size_t p = 0; p < run.phases.size(); ++p) {
      const auto& o = run.phases[p].outcome;
      ev.rewards.push_back(o.reward);
      if (!o.proactive) continue;
      ++acted;
      wrong += o.action != sim::correct_action(sessions[s].script.phases[p].kind);
    }
  }
  const double n = static_cast<double>(ev.rewards.size());
  for (double r : ev.rewards) ev.mean_reward += r / n;
  for (double r : ev.rewards) ev.std_reward += (r - ev.mean_reward) * (r - ev.mean_reward) / n;
  ev.std_reward = std::sqrt(ev.std_reward);
  ev.act_rate = static_cast<double>(acted) / n;
  ev.error_rate = static_cast<double>(wrong) / n;
  return ev;
}

}  // namespace pbt::btree
