#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "pbt/skeleton/skeleton.hpp"
#include "pbt/sim/types.hpp"

namespace pbt::sim {

using skeleton::kDefaultFps;
using skeleton::kWindowFrames;
using skeleton::MotionFrame;

struct SimConfig {
  double fps = kDefaultFps;
  /// Scale of keyframe perturbation and per-frame jitter, in metres.
  double noise_sigma = 0.05;
  double cue_onset_fraction = 0.35;
  double box_delivery_seconds = 8.0;
  double bubble_wrap_seconds = 6.0;
  double wrap_up_seconds = 6.0;
  int max_bubble_wrap_phases = 4;
  /// Probability of another BubbleWrap phase instead of wrapping up early.
  double continue_probability = 1.0;

  void validate() const;
  double window_seconds() const { return static_cast<double>(kWindowFrames) / fps; }
};

struct PhaseScript {
  PhaseKind kind;
  double duration = 0.0;
  double cue_onset = 0.0;
  double t_trigger = 0.0;
  double noise_sigma = 0.0;
  std::size_t start_frame = 0;
  std::size_t frame_count = 0;

  void validate() const;
};

struct SessionScript {
  std::uint64_t seed = 0;
  int box_type = 1;
  int position = 1;
  std::vector<PhaseScript> phases;
};

struct Session {
  SessionScript script;
  double fps = kDefaultFps;
  std::vector<MotionFrame> frames;

  /// Number of complete disjoint windows within a phase.
  std::size_t window_count(std::size_t phase) const;
  /// The window whose last frame precedes decision time (step + 1) * window length.
  std::span<const MotionFrame> window(std::size_t phase, std::size_t step) const;
  double window_seconds() const { return static_cast<double>(kWindowFrames) / fps; }
};

SessionScript make_script(const SimConfig& cfg, std::uint64_t seed);
Session generate_session(const SimConfig& cfg, std::uint64_t seed);

/// Seeds derived from `master` for a named split of sessions.
std::vector<std::uint64_t> session_seeds(std::uint64_t master, std::string_view split, std::size_t count);
std::vector<Session> generate_sessions(const SimConfig& cfg, std::span<const std::uint64_t> seeds);

/// Decision times are t = k * window for k = 1, 2, ... strictly before the trigger.
std::size_t decision_steps(const PhaseScript& phase, double window_seconds);
inline double decision_time(std::size_t step, double window_seconds) {
  return static_cast<double>(step + 1) * window_seconds;
}

/// Mean per-phase reward of an agent that picks the correct action
/// `reaction_steps` decision steps after the first decision point at or after the cue.
double oracle_return(const SessionScript& script, int reaction_steps, double window_seconds = 1.0);

/// Activity label of the window ending at `window_end` (phase-local seconds).
Activity activity_label(const PhaseScript& phase, double window_end, double window_seconds);
/// Supervised target for the baselines: Wait until the cue has been seen, then the correct action.
RobotAction action_label(const PhaseScript& phase, double decision_time);

/// Distance between the wrists of a frame.
double wrist_distance(const MotionFrame& frame);

}  // namespace pbt::sim
