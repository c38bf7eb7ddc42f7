#include "pbt/sim/session.hpp"

#include <cmath>
#include <string>

#include "pbt/common.hpp"
#include "pbt/numcore/rng.hpp"
#include "pbt/sim/reward.hpp"

namespace pbt::sim {

namespace {
constexpr double kTimeEps = 1e-9;
}

void SimConfig::validate() const {
  require(fps > 0.0 && std::isfinite(fps), "sim: fps must be positive");
  require(noise_sigma >= 0.0 && std::isfinite(noise_sigma), "sim: noise sigma must be >= 0");
  require(cue_onset_fraction > 0.0 && cue_onset_fraction < 1.0, "sim: cue onset fraction must lie in (0, 1)");
  require(box_delivery_seconds > 0.0 && bubble_wrap_seconds > 0.0 && wrap_up_seconds > 0.0,
          "sim: phase durations must be positive");
  require(max_bubble_wrap_phases >= 0, "sim: bubble wrap phase count must be >= 0");
  require(continue_probability >= 0.0 && continue_probability <= 1.0, "sim: continue probability must lie in [0, 1]");
}

void PhaseScript::validate() const {
  require(cue_onset > 0.0 && cue_onset < t_trigger && t_trigger <= duration + kTimeEps,
          "phase script: need 0 < cue_onset < t_trigger <= duration");
  require(noise_sigma >= 0.0, "phase script: noise must be >= 0");
}

std::size_t Session::window_count(std::size_t phase) const {
  require(phase < script.phases.size(), "session: phase index out of range");
  return script.phases[phase].frame_count / kWindowFrames;
}

std::span<const MotionFrame> Session::window(std::size_t phase, std::size_t step) const {
  require(step < window_count(phase), "session: window " + std::to_string(step) + " out of range for phase " +
                                          std::to_string(phase));
  const std::size_t start = script.phases[phase].start_frame + step * kWindowFrames;
  return std::span<const MotionFrame>(frames).subspan(start, kWindowFrames);
}

std::vector<std::uint64_t> session_seeds(std::uint64_t master, std::string_view split, std::size_t count) {
  std::vector<std::uint64_t> seeds(count);
  for (std::size_t i = 0; i < count; ++i) seeds[i] = derive_seed(master, split, i);
  return seeds;
}

std::vector<Session> generate_sessions(const SimConfig& cfg, std::span<const std::uint64_t> seeds) {
  std::vector<Session> out;
  out.reserve(seeds.size());
  for (auto s : seeds) out.push_back(generate_session(cfg, s));
  return out;
}

std::size_t decision_steps(const PhaseScript& phase, double window_seconds) {
  require(window_seconds > 0.0, "decision_steps: window length must be positive");
  const double n = std::ceil(phase.t_trigger / window_seconds - kTimeEps) - 1.0;
  return n > 0.0 ? static_cast<std::size_t>(n) : 0;
}

double oracle_return(const SessionScript& script, int reaction_steps, double window_seconds) {
  require(reaction_steps >= 0, "oracle_return: reaction steps must be >= 0");
  require(!script.phases.empty(), "oracle_return: empty script");
  double total = 0.0;
  for (const auto& phase : script.phases) {
    const double first = std::max(1.0, std::ceil(phase.cue_onset / window_seconds - kTimeEps));
    const double t_act = (first + reaction_steps) * window_seconds;
    if (t_act < phase.t_trigger - kTimeEps)
      total += compute_reward(phase.kind, correct_action(phase.kind), phase.t_trigger - t_act);
  }
  return total / static_cast<double>(script.phases.size());
}

Activity activity_label(const PhaseScript& phase, double window_end, double window_seconds) {
  if (window_end <= phase.cue_onset + kTimeEps) return Activity::Idle;
  switch (phase.kind.type) {
    case PhaseType::BoxDelivery:
      if (window_end > phase.duration - window_seconds + kTimeEps) return Activity::PlaceBox;
      return phase.kind.box_type == 1 ? Activity::CarryBox1 : Activity::CarryBox2;
    case PhaseType::BubbleWrap:
      return Activity::PlaceBubble;
    case PhaseType::WrapUp:
      return Activity::WrapUp;
  }
  return Activity::Idle;
}

RobotAction action_label(const PhaseScript& phase, double decision_time) {
  return decision_time <= phase.cue_onset + kTimeEps ? RobotAction::wait() : correct_action(phase.kind);
}

double wrist_distance(const MotionFrame& frame) {
  using namespace skeleton::joints;
  require(frame.joints.size() > kRightWrist, "wrist_distance: frame has too few joints");
  return (frame.joints[kLeftWrist] - frame.joints[kRightWrist]).norm();
}

}  // namespace pbt::sim
