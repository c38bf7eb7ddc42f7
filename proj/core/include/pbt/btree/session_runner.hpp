#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pbt/btree/node.hpp"
#include "pbt/sim/episode.hpp"

namespace pbt::btree {

struct RunnerOptions {
  /// Frames between ticks; must divide the window length.
  std::size_t frames_per_tick = 1;
  /// Ticks a dispatched robot action takes to complete.
  int action_ticks = 1;
  bool record_trace = false;
};

struct TickRecord {
  std::size_t phase = 0;
  double time = 0.0;
  bool window = false;
  NodeStatus status = NodeStatus::Failure;
  friend bool operator==(const TickRecord&, const TickRecord&) = default;
};

struct PhaseRun {
  sim::PhaseOutcome outcome;
  std::size_t ticks = 0;
  /// Which node dispatched the action; empty when none did.
  std::string actor;
};

struct SessionRun {
  std::vector<PhaseRun> phases;
  std::vector<TickRecord> trace;
  std::vector<std::string> diagnostics;

  double total_reward() const;
  double mean_reward() const;
};

/// Streams the session frame by frame through the tree. A window is offered
/// on the tick its last frame arrives, for decision times before the trigger.
/// Phases end once a dispatched action completes.
SessionRun run_session(const sim::Session& session, std::uint32_t session_index, Node& root, const Registry& registry,
                       const RunnerOptions& options = {});

struct TreeEvaluation {
  double mean_reward = 0.0;
  double std_reward = 0.0;
  /// Fraction of phases with a proactive action.
  double act_rate = 0.0;
  /// Fraction of phases with a proactive action that was not the correct one.
  double error_rate = 0.0;
  std::vector<double> rewards;  // per phase, in session order
};

/// Runs every session (indexed by position) and pools per-phase rewards.
TreeEvaluation evaluate_tree(Node& root, const Registry& registry, std::span<const sim::Session> sessions,
                             const RunnerOptions& options = {});

}  // namespace pbt::btree
