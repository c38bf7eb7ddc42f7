#pragma once

#include <cstdint>
#include <span>

#include "pbt/repr/trunk.hpp"

namespace pbt::repr {

struct VaeConfig {
  std::size_t latent_dim = 16;
  double beta = 1.0;
  TrunkConfig trunk;
  std::size_t frames = skeleton::kWindowFrames;
  /// Decoder: dense to [seed_frames x J x channels[0]], then two stride-2
  /// transposed temporal convs to channels[0], channels[1], then a per-joint
  /// dense back to the packed channels.
  std::size_t decoder_seed_frames = 4;
  std::array<std::size_t, 2> decoder_channels{32, 16};
  std::size_t decoder_kernel = 5;
  std::size_t decoder_stride = 2;
  std::size_t aux_classes = 6;
  double logvar_min = -10.0;
  double logvar_max = 10.0;
  /// Initial bias of the log-variance outputs.
  double logvar_bias_init = -4.0;

  // training
  std::size_t epochs = 6;
  std::size_t batch_size = 32;
  double learning_rate = 1e-3;
  double lambda_aux = 0.0;

  void validate() const;
  std::size_t decoder_output_frames() const;
};

template <typename T>
struct Posterior {
  Tensor<T> mean;    // [B x L]
  Tensor<T> logvar;  // [B x L], clamped
};

template <typename T>
struct EncoderCache {
  TrunkCache<T> trunk;
  Tensor<T> pooled;
  Tensor<T> raw_logvar;  // before clamping
};

template <typename T>
struct DecoderCache {
  Tensor<T> z;
  Tensor<T> seed;  // after dense + ReLU, [B x F0 x J x C0]
  Tensor<T> up1;   // after first transposed conv + bias + ReLU
  Tensor<T> up2;   // after second
};

struct VaeLoss {
  double total = 0.0;
  double recon = 0.0;
  double kl = 0.0;
  double aux = 0.0;
  std::size_t aux_correct = 0;
  std::size_t aux_count = 0;
};

/// Closed-form KL(N(mu, exp(logvar)) || N(0, I)) summed over latents and
/// averaged over rows.
template <typename T>
double kl_to_standard_normal(const Posterior<T>& q);

/// Spatio-temporal graph-conv VAE over packed windows [B x T x J x 6] with an
/// auxiliary activity classifier on the posterior mean (weighted by
/// lambda_aux; zero disables its influence on the shared parameters).
template <typename T>
class Vae {
 public:
  Vae() = default;
  Vae(const VaeConfig& cfg, const skeleton::SkeletonGraph& graph, std::uint64_t seed);

  const VaeConfig& config() const noexcept { return cfg_; }
  std::size_t joints() const noexcept { return joints_; }
  ParamSet<T>& params() noexcept { return params_; }
  const ParamSet<T>& params() const noexcept { return params_; }

  Posterior<T> encode(const Tensor<T>& x, EncoderCache<T>* cache = nullptr) const;
  /// Accumulates encoder gradients from d/d(mean) and d/d(clamped logvar).
  void encode_backward(const EncoderCache<T>& cache, const Tensor<T>& dmean, const Tensor<T>& dlogvar);

  /// mean + exp(logvar / 2) * eps with eps ~ N(0, I) drawn from rng.
  Tensor<T> sample(const Posterior<T>& q, Rng& rng, Tensor<T>* eps_out = nullptr) const;

  Tensor<T> decode(const Tensor<T>& z, DecoderCache<T>* cache = nullptr) const;
  /// Accumulates decoder gradients and returns d/dz.
  Tensor<T> decode_backward(const DecoderCache<T>& cache, const Tensor<T>& dxhat);

  /// Logits [B x classes] of the auxiliary head applied to the posterior mean.
  Tensor<T> aux_logits(const Tensor<T>& mean) const;

  /// Loss for a batch. recon = mean over rows of 0.5 * squared error,
  /// total = recon + beta * kl + lambda_aux * aux. labels may be empty (no
  /// auxiliary term) or hold one class per row (-1 = unlabelled). With
  /// accumulate_grads the parameter gradients are accumulated.
  VaeLoss loss(const Tensor<T>& x, std::span<const int> labels, Rng& rng, bool accumulate_grads);

 private:
  VaeConfig cfg_;
  std::size_t joints_ = 0;
  ParamSet<T> params_;
  Trunk<T> trunk_;
  ParamId head_w_, head_b_;
  ParamId dec_w_, dec_b_, up1_k_, up1_b_, up2_k_, up2_b_, out_w_, out_b_;
  ParamId aux_w_, aux_b_;
};

}  // namespace pbt::repr
