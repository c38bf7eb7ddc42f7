// Keyframed synthetic packaging motion.
//
// Coordinates: x lateral, y toward the table, z up (metres). The box shelf is
// behind the human (-y). A pose is the pelvis ground position plus both wrist
// offsets from the pelvis; the rest of the body is derived from those.

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <random>

#include "pbt/common.hpp"
#include "pbt/numcore/rng.hpp"
#include "pbt/sim/session.hpp"

namespace pbt::sim {

namespace {

using skeleton::Vec3;

constexpr std::size_t kPoseDims = 8;
using Pose = std::array<double, kPoseDims>;  // root x, y, left wrist xyz, right wrist xyz

struct Keyframe {
  double time;
  Pose pose;
};

constexpr double kPelvisHeight = 1.0;
constexpr double kStride = 1.2;
constexpr double kJitterAlpha = 0.85;
constexpr double kJitterScale = 0.5;

Pose make_pose(double rx, double ry, Vec3 lw, Vec3 rw) {
  return {rx, ry, lw.x(), lw.y(), lw.z(), rw.x(), rw.y(), rw.z()};
}

Pose symmetric(double rx, double ry, double half_width, double fy, double fz) {
  return make_pose(rx, ry, {-half_width, fy, fz}, {half_width, fy, fz});
}

Pose neutral(double rx, double ry) { return symmetric(rx, ry, 0.22, 0.02, -0.15); }

/// Segment keyframes as (fraction of segment, pose).
using Track = std::vector<std::pair<double, Pose>>;

Track box_pre() {
  return {{0.2, neutral(0.0, -0.3)},
          {0.45, symmetric(0.0, -0.75, 0.22, -0.1, -0.1)},
          {0.7, symmetric(0.0, -1.05, 0.22, -0.25, 0.0)},
          {0.9, symmetric(0.0, -1.2, 0.22, -0.35, 0.05)},
          {1.0, symmetric(0.0, -1.2, 0.22, -0.38, 0.05)}};
}

Track box_post(int box_type, double xp) {
  const double w = box_type == 1 ? 0.35 : 0.15;
  return {{0.08, symmetric(0.1 * xp, -1.2, w, -0.38, 0.05)},
          {0.3, symmetric(0.35 * xp, -1.0, w, -0.2, 0.2)},
          {0.55, symmetric(0.7 * xp, -0.5, w, 0.1, 0.25)},
          {0.8, symmetric(xp, -0.1, w, 0.35, 0.1)},
          {1.0, symmetric(xp, 0.0, w, 0.45, 0.0)}};
}

Track table_pre(double xp) {
  return {{0.25, neutral(xp, 0.0)},
          {0.45, symmetric(xp, 0.05, 0.2, 0.3, -0.05)},
          {0.65, symmetric(xp, 0.05, 0.18, 0.4, -0.1)},
          {0.85, neutral(xp, 0.0)},
          {1.0, symmetric(xp, 0.0, 0.22, 0.05, -0.1)}};
}

Track bubble_post(double xp) {
  return {{0.15, make_pose(xp + 0.15, 0.0, {-0.22, 0.02, -0.15}, {0.6, 0.15, 0.6})},
          {0.35, symmetric(xp + 0.05, 0.05, 0.25, 0.3, 0.3)},
          {0.6, symmetric(xp, 0.1, 0.25, 0.45, 0.05)},
          {0.8, symmetric(xp, 0.05, 0.2, 0.4, 0.0)},
          {1.0, neutral(xp, 0.0)}};
}

Track wrap_post(double xp) {
  return {{0.15, make_pose(xp - 0.15, 0.0, {-0.6, 0.15, -0.35}, {0.22, 0.02, -0.15})},
          {0.35, symmetric(xp - 0.05, 0.05, 0.12, 0.35, 0.15)},
          {0.6, make_pose(xp, 0.1, {0.05, 0.5, 0.05}, {0.3, 0.5, 0.05})},
          {0.8, make_pose(xp, 0.1, {-0.3, 0.5, 0.05}, {-0.05, 0.5, 0.05})},
          {1.0, symmetric(xp, 0.05, 0.1, 0.45, 0.1)}};
}

Pose catmull_rom(const Pose& p0, const Pose& p1, const Pose& p2, const Pose& p3, double u) {
  const double u2 = u * u, u3 = u2 * u;
  Pose out{};
  for (std::size_t d = 0; d < kPoseDims; ++d) {
    out[d] = 0.5 * ((2.0 * p1[d]) + (-p0[d] + p2[d]) * u + (2.0 * p0[d] - 5.0 * p1[d] + 4.0 * p2[d] - p3[d]) * u2 +
                    (-p0[d] + 3.0 * p1[d] - 3.0 * p2[d] + p3[d]) * u3);
  }
  return out;
}

Pose sample(const std::vector<Keyframe>& keys, double t) {
  if (t <= keys.front().time) return keys.front().pose;
  if (t >= keys.back().time) return keys.back().pose;
  std::size_t i = 0;
  while (i + 1 < keys.size() && keys[i + 1].time < t) ++i;
  const std::size_t n = keys.size();
  const Pose& p0 = keys[i == 0 ? 0 : i - 1].pose;
  const Pose& p3 = keys[std::min(i + 2, n - 1)].pose;
  const double u = (t - keys[i].time) / (keys[i + 1].time - keys[i].time);
  return catmull_rom(p0, keys[i].pose, keys[i + 1].pose, p3, u);
}

/// Builds the body from a pose; `gait` is the leg-swing phase and `swing` its amplitude.
std::vector<Vec3> body(const Pose& p, double gait, double swing) {
  using namespace skeleton::joints;
  std::vector<Vec3> j(15);
  const Vec3 pelvis(p[0], p[1], kPelvisHeight + 0.015 * swing * std::sin(2.0 * gait));
  j[kPelvis] = pelvis;
  j[kNeck] = pelvis + Vec3(0.0, 0.0, 0.5);
  j[kHead] = j[kNeck] + Vec3(0.0, 0.0, 0.22);
  j[kLeftShoulder] = j[kNeck] + Vec3(-0.18, 0.0, -0.05);
  j[kRightShoulder] = j[kNeck] + Vec3(0.18, 0.0, -0.05);
  j[kLeftWrist] = pelvis + Vec3(p[2], p[3], p[4]);
  j[kRightWrist] = pelvis + Vec3(p[5], p[6], p[7]);
  j[kLeftElbow] = 0.5 * (j[kLeftShoulder] + j[kLeftWrist]) + Vec3(-0.06, -0.05, -0.08);
  j[kRightElbow] = 0.5 * (j[kRightShoulder] + j[kRightWrist]) + Vec3(0.06, -0.05, -0.08);
  const auto leg = [&](std::size_t hip, std::size_t knee, std::size_t ankle, double side, double phase) {
    j[hip] = pelvis + Vec3(side * 0.1, 0.0, -0.05);
    const double s = swing * std::sin(phase);
    j[knee] = j[hip] + Vec3(0.0, 0.2 * s, -0.45);
    j[ankle] = j[hip] + Vec3(0.0, 0.3 * s - 0.05 * swing * std::cos(phase), -0.9);
  };
  leg(kLeftHip, kLeftKnee, kLeftAnkle, -1.0, gait);
  leg(kRightHip, kRightKnee, kRightAnkle, 1.0, gait + std::numbers::pi);
  return j;
}

}  // namespace

SessionScript make_script(const SimConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  Rng rng(derive_seed(seed, "script"));
  std::uniform_int_distribution<int> coin(1, 2);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  SessionScript script;
  script.seed = seed;
  script.box_type = coin(rng);
  script.position = coin(rng);

  std::size_t frame = 0;
  const auto add = [&](PhaseType type, double duration) {
    PhaseScript p;
    p.kind = PhaseKind{type, script.box_type, script.position};
    p.duration = duration;
    p.cue_onset = cfg.cue_onset_fraction * duration;
    p.t_trigger = duration;
    p.noise_sigma = cfg.noise_sigma;
    p.start_frame = frame;
    p.frame_count = static_cast<std::size_t>(std::llround(duration * cfg.fps));
    frame += p.frame_count;
    script.phases.push_back(p);
  };

  add(PhaseType::BoxDelivery, cfg.box_delivery_seconds);
  for (int i = 0; i < cfg.max_bubble_wrap_phases; ++i) {
    if (unit(rng) >= cfg.continue_probability) break;
    add(PhaseType::BubbleWrap, cfg.bubble_wrap_seconds);
  }
  add(PhaseType::WrapUp, cfg.wrap_up_seconds);
  return script;
}

Session generate_session(const SimConfig& cfg, std::uint64_t seed) {
  Session session;
  session.script = make_script(cfg, seed);
  session.fps = cfg.fps;
  const auto& phases = session.script.phases;
  const double xp = session.script.position == 1 ? -0.4 : 0.4;

  Rng key_rng(derive_seed(seed, "keyframes"));
  Rng jitter_rng(derive_seed(seed, "jitter"));
  std::normal_distribution<double> gauss(0.0, 1.0);

  // Per-phase absolute keyframes; each phase starts from where the last ended.
  std::vector<std::vector<Keyframe>> phase_keys;
  Pose last = neutral(0.0, 0.0);
  for (const auto& ph : phases) {
    const double t0 = static_cast<double>(ph.start_frame) / cfg.fps;
    const double sigma = ph.noise_sigma;
    std::vector<Keyframe> keys{{t0, last}};
    const auto append = [&](const Track& track, double seg_start, double seg_len) {
      for (const auto& [frac, pose] : track) {
        Pose p = pose;
        for (auto& v : p) v += sigma * gauss(key_rng);
        keys.push_back({t0 + seg_start + frac * seg_len, p});
      }
    };
    const double cue = ph.cue_onset, post = ph.duration - ph.cue_onset;
    switch (ph.kind.type) {
      case PhaseType::BoxDelivery:
        append(box_pre(), 0.0, cue);
        append(box_post(ph.kind.box_type, xp), cue, post);
        break;
      case PhaseType::BubbleWrap:
        append(table_pre(xp), 0.0, cue);
        append(bubble_post(xp), cue, post);
        break;
      case PhaseType::WrapUp:
        append(table_pre(xp), 0.0, cue);
        append(wrap_post(xp), cue, post);
        break;
    }
    last = keys.back().pose;
    phase_keys.push_back(std::move(keys));
  }

  const std::size_t total = phases.empty() ? 0 : phases.back().start_frame + phases.back().frame_count;
  session.frames.reserve(total);
  std::vector<Vec3> jitter(15, Vec3::Zero());
  const double innovation = std::sqrt(1.0 - kJitterAlpha * kJitterAlpha);
  double gait = 0.0;
  Pose prev = neutral(0.0, 0.0);
  for (std::size_t p = 0; p < phases.size(); ++p) {
    const auto& ph = phases[p];
    const double jitter_sigma = kJitterScale * ph.noise_sigma;
    for (std::size_t k = 0; k < ph.frame_count; ++k) {
      const std::size_t f = ph.start_frame + k;
      const double t = static_cast<double>(f) / cfg.fps;
      const Pose pose = sample(phase_keys[p], t);
      const double step = std::hypot(pose[0] - prev[0], pose[1] - prev[1]);
      gait += 2.0 * std::numbers::pi * step / kStride;
      const double swing = std::min(1.0, step * cfg.fps / 0.8);
      prev = pose;

      MotionFrame frame;
      frame.timestamp = t;
      frame.joints = body(pose, gait, swing);
      for (std::size_t j = 0; j < frame.joints.size(); ++j) {
        for (int d = 0; d < 3; ++d)
          jitter[j][d] = kJitterAlpha * jitter[j][d] + innovation * jitter_sigma * gauss(jitter_rng);
        frame.joints[j] += jitter[j];
      }
      session.frames.push_back(std::move(frame));
    }
  }
  return session;
}

}  // namespace pbt::sim
