#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "pbt/repr/normalizer.hpp"
#include "pbt/repr/vae.hpp"
#include "pbt/sim/session.hpp"

namespace pbt::repr {

/// Identifies a window inside a list of sessions.
struct WindowKey {
  std::uint32_t session = 0;
  std::uint32_t phase = 0;
  std::uint32_t step = 0;
  friend auto operator<=>(const WindowKey&, const WindowKey&) = default;
};

/// Every complete window of every phase, packed, with its activity label.
template <typename T>
struct WindowDataset {
  Tensor<T> windows;  // [N x 25 x J x 6]
  std::vector<int> activity;
  std::vector<WindowKey> keys;
  std::size_t size() const noexcept { return keys.size(); }
};

template <typename T>
WindowDataset<T> build_window_dataset(std::span<const sim::Session> sessions, const skeleton::SkeletonGraph& graph);

struct VaeEpochStats {
  double total = 0.0;
  double recon = 0.0;
  double kl = 0.0;
  double aux = 0.0;
  double aux_accuracy = 0.0;
};

struct VaeTrace {
  /// Loss of the very first minibatch before any update.
  double initial_total = 0.0;
  std::vector<VaeEpochStats> epochs;
};

template <typename T>
struct TrainedVae {
  Vae<T> model;
  VaeTrace trace;
};

/// Minibatch Adam on already-normalized windows.
template <typename T>
TrainedVae<T> train_vae(const Tensor<T>& windows, const skeleton::SkeletonGraph& graph, const VaeConfig& cfg,
                        std::uint64_t seed);

/// Same as train_vae with the auxiliary activity loss weighted by lambda_aux.
template <typename T>
TrainedVae<T> train_vae_with_aux(const Tensor<T>& windows, std::span<const int> labels,
                                 const skeleton::SkeletonGraph& graph, const VaeConfig& cfg, double lambda_aux,
                                 std::uint64_t seed);

/// Continues training an existing model; labels may be empty.
template <typename T>
VaeTrace fit_vae(Vae<T>& vae, const Tensor<T>& windows, std::span<const int> labels, std::uint64_t seed);

/// Posterior means [N x latent] computed in chunks.
template <typename T>
Tensor<T> encode_means(const Vae<T>& vae, const Tensor<T>& windows, std::size_t chunk = 256);

/// Mean per-element squared reconstruction error of the posterior means.
template <typename T>
double reconstruction_mse(const Vae<T>& vae, const Tensor<T>& windows, std::size_t chunk = 256);

}  // namespace pbt::repr
