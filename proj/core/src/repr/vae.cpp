#include "pbt/repr/vae.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "pbt/numcore/ops.hpp"

namespace pbt::repr {

void VaeConfig::validate() const {
  require(latent_dim >= 1, "vae: latent_dim must be >= 1");
  require(beta >= 0.0 && std::isfinite(beta), "vae: beta must be >= 0");
  require(lambda_aux >= 0.0 && std::isfinite(lambda_aux), "vae: lambda_aux must be >= 0");
  require(batch_size >= 1, "vae: batch size must be >= 1");
  require(learning_rate > 0.0, "vae: learning rate must be positive");
  require(logvar_min < logvar_max, "vae: empty log-variance range");
  require(aux_classes >= 2, "vae: auxiliary head needs at least two classes");
  require(decoder_seed_frames >= 1 && decoder_kernel >= 1 && decoder_stride >= 1, "vae: bad decoder geometry");
  trunk.validate();
  trunk.output_frames(frames);
  require(decoder_output_frames() == frames,
          "vae: decoder produces " + std::to_string(decoder_output_frames()) + " frames, windows have " +
              std::to_string(frames));
}

std::size_t VaeConfig::decoder_output_frames() const {
  std::size_t f = decoder_seed_frames;
  for (int i = 0; i < 2; ++i) f = (f - 1) * decoder_stride + decoder_kernel;
  return f;
}

template <typename T>
double kl_to_standard_normal(const Posterior<T>& q) {
  require(q.mean.shape() == q.logvar.shape() && q.mean.rank() == 2, "kl: posterior shapes do not conform");
  double s = 0.0;
  for (std::size_t i = 0; i < q.mean.size(); ++i) {
    const double m = q.mean[i], lv = q.logvar[i];
    s += 0.5 * (m * m + std::exp(lv) - 1.0 - lv);
  }
  return s / static_cast<double>(q.mean.dim(0));
}

template <typename T>
Vae<T>::Vae(const VaeConfig& cfg, const skeleton::SkeletonGraph& graph, std::uint64_t seed)
    : cfg_(cfg), joints_(graph.joint_count()) {
  cfg_.validate();
  Rng rng(derive_seed(seed, "vae-init"));
  trunk_ = Trunk<T>(params_, "enc", cfg_.trunk, graph, rng);
  const std::size_t w = cfg_.trunk.output_width(), l = cfg_.latent_dim;
  head_w_ = params_.add("enc.head.w", nn::uniform_fan_in<T>({w, 2 * l}, w, rng));
  Tensor<T> head_b({2 * l});
  for (std::size_t j = l; j < 2 * l; ++j) head_b[j] = static_cast<T>(cfg_.logvar_bias_init);
  head_b_ = params_.add("enc.head.b", std::move(head_b));

  const std::size_t c0 = cfg_.decoder_channels[0], c1 = cfg_.decoder_channels[1], k = cfg_.decoder_kernel;
  const std::size_t seed_units = cfg_.decoder_seed_frames * joints_ * c0;
  const std::size_t c_out = cfg_.trunk.in_channels;
  dec_w_ = params_.add("dec.seed.w", nn::he_uniform<T>({l, seed_units}, l, rng));
  dec_b_ = params_.add("dec.seed.b", Tensor<T>({seed_units}));
  up1_k_ = params_.add("dec.up1.w", nn::he_uniform<T>({c0, k, c0}, c0 * k, rng));
  up1_b_ = params_.add("dec.up1.b", Tensor<T>({c0}));
  up2_k_ = params_.add("dec.up2.w", nn::he_uniform<T>({c0, k, c1}, c0 * k, rng));
  up2_b_ = params_.add("dec.up2.b", Tensor<T>({c1}));
  out_w_ = params_.add("dec.out.w", nn::uniform_fan_in<T>({c1, c_out}, c1, rng));
  out_b_ = params_.add("dec.out.b", Tensor<T>({c_out}));

  // Separate stream so the auxiliary head never shifts the other initial values.
  Rng aux_rng(derive_seed(seed, "vae-aux-init"));
  aux_w_ = params_.add("aux.w", nn::uniform_fan_in<T>({l, cfg_.aux_classes}, l, aux_rng));
  aux_b_ = params_.add("aux.b", Tensor<T>({cfg_.aux_classes}));
}

template <typename T>
Posterior<T> Vae<T>::encode(const Tensor<T>& x, EncoderCache<T>* cache) const {
  require(x.rank() == 4 && x.dim(1) == cfg_.frames,
          "vae encode: input " + nn::to_string(x.shape()) + " must have " + std::to_string(cfg_.frames) + " frames");
  TrunkCache<T>* tc = cache ? &cache->trunk : nullptr;
  Tensor<T> pooled = trunk_.forward(params_, x, tc);
  Tensor<T> h = nn::dense_forward(pooled, params_.value(head_w_), params_.value(head_b_));
  const std::size_t b = x.dim(0), l = cfg_.latent_dim;
  Posterior<T> q{Tensor<T>({b, l}), Tensor<T>({b, l})};
  Tensor<T> raw({b, l});
  const T lo = static_cast<T>(cfg_.logvar_min), hi = static_cast<T>(cfg_.logvar_max);
  for (std::size_t r = 0; r < b; ++r)
    for (std::size_t j = 0; j < l; ++j) {
      q.mean(r, j) = h(r, j);
      raw(r, j) = h(r, l + j);
      q.logvar(r, j) = std::clamp(raw(r, j), lo, hi);
    }
  if (cache) {
    cache->pooled = std::move(pooled);
    cache->raw_logvar = std::move(raw);
  }
  return q;
}

template <typename T>
void Vae<T>::encode_backward(const EncoderCache<T>& cache, const Tensor<T>& dmean, const Tensor<T>& dlogvar) {
  const std::size_t b = dmean.dim(0), l = cfg_.latent_dim;
  require(dmean.shape() == nn::Shape({b, l}) && dlogvar.shape() == dmean.shape(),
          "vae encode_backward: gradient shapes do not conform");
  Tensor<T> dh({b, 2 * l});
  const T lo = static_cast<T>(cfg_.logvar_min), hi = static_cast<T>(cfg_.logvar_max);
  for (std::size_t r = 0; r < b; ++r)
    for (std::size_t j = 0; j < l; ++j) {
      dh(r, j) = dmean(r, j);
      const T raw = cache.raw_logvar(r, j);
      dh(r, l + j) = (raw >= lo && raw <= hi) ? dlogvar(r, j) : T{0};
    }
  Tensor<T> dpooled = nn::dense_backward(cache.pooled, params_.value(head_w_), dh, params_.grad(head_w_),
                                         params_.grad(head_b_));
  trunk_.backward(params_, cache.trunk, dpooled);
}

template <typename T>
Tensor<T> Vae<T>::sample(const Posterior<T>& q, Rng& rng, Tensor<T>* eps_out) const {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Tensor<T> z(q.mean.shape());
  Tensor<T> eps(q.mean.shape());
  for (std::size_t i = 0; i < z.size(); ++i) {
    eps[i] = static_cast<T>(gauss(rng));
    z[i] = q.mean[i] + std::exp(q.logvar[i] / T{2}) * eps[i];
  }
  if (eps_out) *eps_out = std::move(eps);
  return z;
}

template <typename T>
Tensor<T> Vae<T>::decode(const Tensor<T>& z, DecoderCache<T>* cache) const {
  require(z.rank() == 2 && z.dim(1) == cfg_.latent_dim,
          "vae decode: latent " + nn::to_string(z.shape()) + " must be [B x " + std::to_string(cfg_.latent_dim) + "]");
  const std::size_t b = z.dim(0);
  Tensor<T> seed = nn::relu(nn::dense_forward(z, params_.value(dec_w_), params_.value(dec_b_)));
  seed.reshape({b, cfg_.decoder_seed_frames, joints_, cfg_.decoder_channels[0]});
  Tensor<T> up1 = nn::temporal_conv_transpose_forward(seed, params_.value(up1_k_), cfg_.decoder_stride);
  nn::add_bias(up1, params_.value(up1_b_));
  up1 = nn::relu(up1);
  Tensor<T> up2 = nn::temporal_conv_transpose_forward(up1, params_.value(up2_k_), cfg_.decoder_stride);
  nn::add_bias(up2, params_.value(up2_b_));
  up2 = nn::relu(up2);
  Tensor<T> out = nn::dense_forward(up2, params_.value(out_w_), params_.value(out_b_));
  if (cache) {
    cache->z = z;
    cache->seed = std::move(seed);
    cache->up1 = std::move(up1);
    cache->up2 = std::move(up2);
  }
  return out;
}

template <typename T>
Tensor<T> Vae<T>::decode_backward(const DecoderCache<T>& cache, const Tensor<T>& dxhat) {
  Tensor<T> d = nn::dense_backward(cache.up2, params_.value(out_w_), dxhat, params_.grad(out_w_), params_.grad(out_b_));
  d = nn::relu_backward(cache.up2, d);
  nn::bias_backward(d, params_.grad(up2_b_));
  d = nn::temporal_conv_transpose_backward(cache.up1, params_.value(up2_k_), cfg_.decoder_stride, d,
                                           params_.grad(up2_k_));
  d = nn::relu_backward(cache.up1, d);
  nn::bias_backward(d, params_.grad(up1_b_));
  d = nn::temporal_conv_transpose_backward(cache.seed, params_.value(up1_k_), cfg_.decoder_stride, d,
                                           params_.grad(up1_k_));
  d = nn::relu_backward(cache.seed, d);
  d.reshape({cache.z.dim(0), d.size() / cache.z.dim(0)});
  return nn::dense_backward(cache.z, params_.value(dec_w_), d, params_.grad(dec_w_), params_.grad(dec_b_));
}

template <typename T>
Tensor<T> Vae<T>::aux_logits(const Tensor<T>& mean) const {
  return nn::dense_forward(mean, params_.value(aux_w_), params_.value(aux_b_));
}

template <typename T>
VaeLoss Vae<T>::loss(const Tensor<T>& x, std::span<const int> labels, Rng& rng, bool accumulate_grads) {
  const std::size_t b = x.dim(0);
  require(labels.empty() || labels.size() == b,
          "vae loss: " + std::to_string(labels.size()) + " labels for " + std::to_string(b) + " windows");
  EncoderCache<T> ec;
  DecoderCache<T> dc;
  Posterior<T> q = encode(x, accumulate_grads ? &ec : nullptr);
  Tensor<T> eps;
  Tensor<T> z = sample(q, rng, &eps);
  Tensor<T> xhat = decode(z, accumulate_grads ? &dc : nullptr);

  VaeLoss out;
  const double inv_b = 1.0 / static_cast<double>(b);
  Tensor<T> dxhat(xhat.shape());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double e = static_cast<double>(xhat[i]) - static_cast<double>(x[i]);
    out.recon += 0.5 * e * e;
    dxhat[i] = static_cast<T>(e * inv_b);
  }
  out.recon *= inv_b;
  out.kl = kl_to_standard_normal(q);

  Tensor<T> logits, dlogits;
  if (!labels.empty()) {
    logits = aux_logits(q.mean);
    out.aux = nn::softmax_cross_entropy(logits, labels, accumulate_grads ? &dlogits : nullptr);
    for (std::size_t r = 0; r < b; ++r) {
      if (labels[r] < 0) continue;
      std::size_t best = 0;
      for (std::size_t c = 1; c < logits.dim(1); ++c)
        if (logits(r, c) > logits(r, best)) best = c;
      out.aux_correct += static_cast<int>(best) == labels[r];
      ++out.aux_count;
    }
  }
  out.total = out.recon + cfg_.beta * out.kl + cfg_.lambda_aux * out.aux;
  if (!accumulate_grads) return out;

  Tensor<T> dz = decode_backward(dc, dxhat);
  Tensor<T> dmean(q.mean.shape()), dlogvar(q.mean.shape());
  const T beta_b = static_cast<T>(cfg_.beta * inv_b);
  for (std::size_t i = 0; i < dmean.size(); ++i) {
    const T sd = std::exp(q.logvar[i] / T{2});
    dmean[i] = dz[i] + beta_b * q.mean[i];
    dlogvar[i] = dz[i] * eps[i] * sd / T{2} + beta_b * (sd * sd - T{1}) / T{2};
  }
  if (!labels.empty()) {
    const T lam = static_cast<T>(cfg_.lambda_aux);
    for (auto& v : dlogits.data()) v *= lam;
    Tensor<T> dm = nn::dense_backward(q.mean, params_.value(aux_w_), dlogits, params_.grad(aux_w_),
                                      params_.grad(aux_b_));
    for (std::size_t i = 0; i < dmean.size(); ++i) dmean[i] += dm[i];
  }
  encode_backward(ec, dmean, dlogvar);
  return out;
}

template double kl_to_standard_normal(const Posterior<float>&);
template double kl_to_standard_normal(const Posterior<double>&);
template class Vae<float>;
template class Vae<double>;

}  // namespace pbt::repr
