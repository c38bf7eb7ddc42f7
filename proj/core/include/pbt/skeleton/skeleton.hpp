#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "pbt/numcore/tensor.hpp"

namespace pbt::skeleton {

using Vec3 = Eigen::Vector3d;

/// Frames per observation window (one decision step).
inline constexpr std::size_t kWindowFrames = 25;
/// Default motion frame rate; with 25-frame windows this is one decision per second.
inline constexpr double kDefaultFps = 25.0;
/// Packed channels per joint: root-relative x,y,z then root position x,y,z
/// (non-zero on the root joint only).
inline constexpr std::size_t kPackedChannels = 6;

/// Undirected kinematic tree over joint indices. Construction rejects
/// out-of-range indices, self-loops, duplicate edges and disconnected graphs.
class SkeletonGraph {
 public:
  SkeletonGraph(std::size_t joint_count, std::vector<std::pair<std::size_t, std::size_t>> edges,
                std::vector<std::string> joint_names = {}, std::size_t root = 0);

  std::size_t joint_count() const noexcept { return joint_count_; }
  const std::vector<std::pair<std::size_t, std::size_t>>& edges() const noexcept { return edges_; }
  const std::vector<std::string>& joint_names() const noexcept { return names_; }
  std::size_t root() const noexcept { return root_; }
  std::optional<std::size_t> joint_index(const std::string& name) const;

 private:
  std::size_t joint_count_;
  std::vector<std::pair<std::size_t, std::size_t>> edges_;
  std::vector<std::string> names_;
  std::size_t root_;
};

/// Joint indices of the default 15-joint body.
namespace joints {
inline constexpr std::size_t kPelvis = 0, kNeck = 1, kHead = 2;
inline constexpr std::size_t kLeftShoulder = 3, kLeftElbow = 4, kLeftWrist = 5;
inline constexpr std::size_t kRightShoulder = 6, kRightElbow = 7, kRightWrist = 8;
inline constexpr std::size_t kLeftHip = 9, kLeftKnee = 10, kLeftAnkle = 11;
inline constexpr std::size_t kRightHip = 12, kRightKnee = 13, kRightAnkle = 14;
}  // namespace joints

/// Head, neck, shoulders/elbows/wrists, pelvis, hips/knees/ankles; rooted at
/// the pelvis.
SkeletonGraph default_skeleton();

/// D^-1/2 (A + I) D^-1/2 with D the degree matrix of A + I.
template <typename T>
nn::Tensor<T> normalized_adjacency(const SkeletonGraph& graph);

/// One pose sample in world coordinates (meters) with a timestamp (seconds).
struct MotionFrame {
  std::vector<Vec3> joints;
  double timestamp = 0.0;
};

using Window = std::vector<MotionFrame>;

/// Collects frames and emits disjoint windows of exactly `capacity` frames.
class FrameBuffer {
 public:
  explicit FrameBuffer(std::size_t capacity = kWindowFrames);

  /// Appends a frame; returns the completed window every `capacity` pushes.
  /// Throws ContractViolation when timestamps do not strictly increase or a
  /// coordinate is not finite.
  std::optional<Window> push_frame(MotionFrame frame);

  std::size_t capacity() const noexcept { return capacity_; }
  std::size_t pending() const noexcept { return frames_.size(); }
  void clear();

 private:
  std::size_t capacity_;
  std::vector<MotionFrame> frames_;
  std::optional<double> last_timestamp_;
};

/// Packs a window into [1 x frames x J x 6]: joint order follows the graph,
/// channels 0..2 hold joint - root, channels 3..5 hold the root position on
/// the root joint (zero elsewhere).
template <typename T>
nn::Tensor<T> to_graph_tensor(std::span<const MotionFrame> window, const SkeletonGraph& graph);

/// Packs several equal-length windows into one batch tensor.
template <typename T>
nn::Tensor<T> to_graph_batch(std::span<const std::span<const MotionFrame>> windows, const SkeletonGraph& graph);

/// Inverse of to_graph_tensor for one window (timestamps are not packed).
template <typename T>
std::vector<std::vector<Vec3>> unpack_graph_tensor(const nn::Tensor<T>& packed, const SkeletonGraph& graph);

}  // namespace pbt::skeleton
