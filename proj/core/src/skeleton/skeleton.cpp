#include "pbt/skeleton/skeleton.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace pbt::skeleton {

SkeletonGraph::SkeletonGraph(std::size_t joint_count, std::vector<std::pair<std::size_t, std::size_t>> edges,
                             std::vector<std::string> joint_names, std::size_t root)
    : joint_count_(joint_count), edges_(std::move(edges)), names_(std::move(joint_names)), root_(root) {
  require(joint_count_ >= 1, "skeleton must have at least one joint");
  require(root_ < joint_count_, "skeleton root index out of range");
  require(names_.empty() || names_.size() == joint_count_, "skeleton joint names do not match joint count");
  std::set<std::pair<std::size_t, std::size_t>> seen;
  std::vector<std::vector<std::size_t>> adj(joint_count_);
  for (auto [a, b] : edges_) {
    require(a < joint_count_ && b < joint_count_,
            "skeleton edge (" + std::to_string(a) + "," + std::to_string(b) + ") references a missing joint");
    require(a != b, "skeleton edge on joint " + std::to_string(a) + " is a self-loop");
    const auto key = std::minmax(a, b);
    require(seen.insert(key).second,
            "duplicate skeleton edge (" + std::to_string(a) + "," + std::to_string(b) + ")");
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
  std::vector<bool> visited(joint_count_, false);
  std::vector<std::size_t> stack{0};
  visited[0] = true;
  std::size_t reached = 1;
  while (!stack.empty()) {
    const auto v = stack.back();
    stack.pop_back();
    for (auto w : adj[v])
      if (!visited[w]) {
        visited[w] = true;
        ++reached;
        stack.push_back(w);
      }
  }
  require(reached == joint_count_, "skeleton graph is disconnected");
}

std::optional<std::size_t> SkeletonGraph::joint_index(const std::string& name) const {
  auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - names_.begin());
}

SkeletonGraph default_skeleton() {
  using namespace joints;
  std::vector<std::pair<std::size_t, std::size_t>> edges = {
      {kPelvis, kNeck},          {kNeck, kHead},
      {kNeck, kLeftShoulder},    {kLeftShoulder, kLeftElbow},   {kLeftElbow, kLeftWrist},
      {kNeck, kRightShoulder},   {kRightShoulder, kRightElbow}, {kRightElbow, kRightWrist},
      {kPelvis, kLeftHip},       {kLeftHip, kLeftKnee},         {kLeftKnee, kLeftAnkle},
      {kPelvis, kRightHip},      {kRightHip, kRightKnee},       {kRightKnee, kRightAnkle},
  };
  std::vector<std::string> names = {"pelvis",    "neck",       "head",     "l_shoulder", "l_elbow",
                                    "l_wrist",   "r_shoulder", "r_elbow",  "r_wrist",    "l_hip",
                                    "l_knee",    "l_ankle",    "r_hip",    "r_knee",     "r_ankle"};
  return SkeletonGraph(15, std::move(edges), std::move(names), kPelvis);
}

template <typename T>
nn::Tensor<T> normalized_adjacency(const SkeletonGraph& graph) {
  const std::size_t n = graph.joint_count();
  std::vector<double> a(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) a[i * n + i] = 1.0;
  for (auto [u, v] : graph.edges()) {
    a[u * n + v] = 1.0;
    a[v * n + u] = 1.0;
  }
  std::vector<double> inv_sqrt_deg(n);
  for (std::size_t i = 0; i < n; ++i) {
    double deg = 0.0;
    for (std::size_t j = 0; j < n; ++j) deg += a[i * n + j];
    inv_sqrt_deg[i] = 1.0 / std::sqrt(deg);
  }
  nn::Tensor<T> out({n, n});
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      out[i * n + j] = static_cast<T>(inv_sqrt_deg[i] * a[i * n + j] * inv_sqrt_deg[j]);
  return out;
}

FrameBuffer::FrameBuffer(std::size_t capacity) : capacity_(capacity) {
  require(capacity_ >= 1, "frame buffer capacity must be positive");
  frames_.reserve(capacity_);
}

std::optional<Window> FrameBuffer::push_frame(MotionFrame frame) {
  require(!last_timestamp_ || frame.timestamp > *last_timestamp_,
          "frame timestamp " + std::to_string(frame.timestamp) + " does not follow " +
              std::to_string(last_timestamp_.value_or(0.0)));
  for (const auto& j : frame.joints) require(j.allFinite(), "motion frame contains a non-finite coordinate");
  last_timestamp_ = frame.timestamp;
  frames_.push_back(std::move(frame));
  if (frames_.size() < capacity_) return std::nullopt;
  Window window = std::move(frames_);
  frames_.clear();
  frames_.reserve(capacity_);
  return window;
}

void FrameBuffer::clear() {
  frames_.clear();
  last_timestamp_.reset();
}

namespace {

template <typename T>
void pack_window(std::span<const MotionFrame> window, const SkeletonGraph& graph, T* out) {
  const std::size_t nj = graph.joint_count();
  const std::size_t root = graph.root();
  for (const auto& frame : window) {
    require(frame.joints.size() == nj, "motion frame has " + std::to_string(frame.joints.size()) +
                                           " joints, skeleton has " + std::to_string(nj));
    const Vec3& r = frame.joints[root];
    for (std::size_t j = 0; j < nj; ++j) {
      const Vec3& p = frame.joints[j];
      T* dst = out + j * kPackedChannels;
      for (int c = 0; c < 3; ++c) dst[c] = static_cast<T>(p[c] - r[c]);
      for (int c = 0; c < 3; ++c) dst[3 + c] = j == root ? static_cast<T>(r[c]) : T{0};
    }
    out += nj * kPackedChannels;
  }
}

}  // namespace

template <typename T>
nn::Tensor<T> to_graph_tensor(std::span<const MotionFrame> window, const SkeletonGraph& graph) {
  require(!window.empty(), "to_graph_tensor: empty window");
  nn::Tensor<T> out({1, window.size(), graph.joint_count(), kPackedChannels});
  pack_window(window, graph, out.raw());
  return out;
}

template <typename T>
nn::Tensor<T> to_graph_batch(std::span<const std::span<const MotionFrame>> windows, const SkeletonGraph& graph) {
  require(!windows.empty(), "to_graph_batch: no windows");
  const std::size_t frames = windows.front().size();
  require(frames > 0, "to_graph_batch: empty window");
  const std::size_t stride = frames * graph.joint_count() * kPackedChannels;
  nn::Tensor<T> out({windows.size(), frames, graph.joint_count(), kPackedChannels});
  for (std::size_t b = 0; b < windows.size(); ++b) {
    require(windows[b].size() == frames, "to_graph_batch: windows differ in length");
    pack_window(windows[b], graph, out.raw() + b * stride);
  }
  return out;
}

template <typename T>
std::vector<std::vector<Vec3>> unpack_graph_tensor(const nn::Tensor<T>& packed, const SkeletonGraph& graph) {
  const std::size_t nj = graph.joint_count();
  require(packed.rank() == 4 && packed.dim(0) == 1 && packed.dim(2) == nj && packed.dim(3) == kPackedChannels,
          "unpack_graph_tensor: unexpected shape " + nn::to_string(packed.shape()));
  const std::size_t root = graph.root();
  std::vector<std::vector<Vec3>> frames(packed.dim(1), std::vector<Vec3>(nj));
  for (std::size_t t = 0; t < packed.dim(1); ++t) {
    const T* src = packed.raw() + t * nj * kPackedChannels;
    const T* r = src + root * kPackedChannels + 3;
    for (std::size_t j = 0; j < nj; ++j)
      for (int c = 0; c < 3; ++c)
        frames[t][j][c] = static_cast<double>(src[j * kPackedChannels + c]) + static_cast<double>(r[c]);
  }
  return frames;
}

template nn::Tensor<float> normalized_adjacency(const SkeletonGraph&);
template nn::Tensor<double> normalized_adjacency(const SkeletonGraph&);
template nn::Tensor<float> to_graph_tensor(std::span<const MotionFrame>, const SkeletonGraph&);
template nn::Tensor<double> to_graph_tensor(std::span<const MotionFrame>, const SkeletonGraph&);
template nn::Tensor<float> to_graph_batch(std::span<const std::span<const MotionFrame>>, const SkeletonGraph&);
template nn::Tensor<double> to_graph_batch(std::span<const std::span<const MotionFrame>>, const SkeletonGraph&);
template std::vector<std::vector<Vec3>> unpack_graph_tensor(const nn::Tensor<float>&, const SkeletonGraph&);
template std::vector<std::vector<Vec3>> unpack_graph_tensor(const nn::Tensor<double>&, const SkeletonGraph&);

}  // namespace pbt::skeleton
