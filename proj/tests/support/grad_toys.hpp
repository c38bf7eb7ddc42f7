#pragma once

// Gradient-check setups on toy shapes (3 joints, 25 frames, latent 4). Each
// returns the report of nn::grad_check against central differences.

#include <memory>
#include <random>
#include <vector>

#include "pbt/drqn/td_loss.hpp"
#include "pbt/numcore/grad_check.hpp"
#include "pbt/numcore/lstm.hpp"
#include "pbt/numcore/ops.hpp"
#include "pbt/repr/vae.hpp"
#include "pbt/skeleton/skeleton.hpp"

namespace pbt::testing {

using nn::GradCheckReport;
using nn::ParamSet;
using nn::Tensor;

inline Tensor<double> randn(nn::Shape shape, Rng& rng, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  Tensor<double> t(std::move(shape));
  for (auto& v : t.data()) v = n(rng);
  return t;
}

/// Linear read-out sum(y * r): dL/dy = r.
inline double project(const Tensor<double>& y, const Tensor<double>& r) {
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) s += y[i] * r[i];
  return s;
}

inline void add_into(Tensor<double>& acc, const Tensor<double>& g) {
  for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += g[i];
}

inline skeleton::SkeletonGraph chain3() { return skeleton::SkeletonGraph(3, {{0, 1}, {1, 2}}); }

inline GradCheckReport check_dense(std::uint64_t seed = 1) {
  Rng rng(seed);
  ParamSet<double> p;
  const auto x = p.add("x", randn({4, 5}, rng));
  const auto w = p.add("w", randn({5, 3}, rng));
  const auto b = p.add("b", randn({3}, rng));
  const Tensor<double> r = randn({4, 3}, rng);
  return nn::grad_check(
      [&](ParamSet<double>& ps, bool acc) {
        const Tensor<double> y = nn::dense_forward(ps.value(x), ps.value(w), ps.value(b));
        if (acc) add_into(ps.grad(x), nn::dense_backward(ps.value(x), ps.value(w), r, ps.grad(w), ps.grad(b)));
        return project(y, r);
      },
      p, {.coords_per_param = 1000});
}

inline GradCheckReport check_graph_conv(std::uint64_t seed = 2) {
  Rng rng(seed);
  const Tensor<double> a = skeleton::normalized_adjacency<double>(chain3());
  ParamSet<double> p;
  const auto x = p.add("x", randn({2, 25, 3, 4}, rng));
  const auto w = p.add("w", randn({4, 5}, rng));
  const Tensor<double> r = randn({2, 25, 3, 5}, rng);
  return nn::grad_check(
      [&](ParamSet<double>& ps, bool acc) {
        const Tensor<double> y = nn::graph_conv_forward(ps.value(x), a, ps.value(w));
        if (acc) add_into(ps.grad(x), nn::graph_conv_backward(ps.value(x), a, ps.value(w), r, ps.grad(w)));
        return project(y, r);
      },
      p, {.coords_per_param = 200});
}

inline GradCheckReport check_temporal_conv(std::size_t stride = 2, std::uint64_t seed = 3) {
  Rng rng(seed);
  ParamSet<double> p;
  const auto x = p.add("x", randn({2, 25, 3, 4}, rng));
  const auto k = p.add("k", randn({3, 4, 5}, rng));
  const Tensor<double> r = randn({2, nn::temporal_output_length(25, 3, stride), 3, 5}, rng);
  return nn::grad_check(
      [&](ParamSet<double>& ps, bool acc) {
        const Tensor<double> y = nn::temporal_conv_forward(ps.value(x), ps.value(k), stride);
        if (acc) add_into(ps.grad(x), nn::temporal_conv_backward(ps.value(x), ps.value(k), stride, r, ps.grad(k)));
        return project(y, r);
      },
      p, {.coords_per_param = 200});
}

inline GradCheckReport check_temporal_conv_transpose(std::uint64_t seed = 4) {
  Rng rng(seed);
  const std::size_t stride = 2;
  ParamSet<double> p;
  const auto x = p.add("x", randn({2, 11, 3, 4}, rng));
  const auto k = p.add("k", randn({4, 5, 3}, rng));
  const Tensor<double> r = randn({2, (11 - 1) * stride + 5, 3, 3}, rng);
  return nn::grad_check(
      [&](ParamSet<double>& ps, bool acc) {
        const Tensor<double> y = nn::temporal_conv_transpose_forward(ps.value(x), ps.value(k), stride);
        if (acc)
          add_into(ps.grad(x),
                   nn::temporal_conv_transpose_backward(ps.value(x), ps.value(k), stride, r, ps.grad(k)));
        return project(y, r);
      },
      p, {.coords_per_param = 200});
}

/// Three unrolled cell steps with read-outs on every hidden and the last cell state.
inline GradCheckReport check_lstm(std::uint64_t seed = 5) {
  Rng rng(seed);
  constexpr std::size_t kSteps = 3, kBatch = 2, kIn = 4, kHidden = 3;
  ParamSet<double> p;
  const auto layer = nn::LstmLayer::create(p, "lstm", kIn, kHidden, rng);
  const auto x = p.add("x", randn({kSteps, kBatch, kIn}, rng));
  const auto h0 = p.add("h0", randn({kBatch, kHidden}, rng, 0.5));
  const auto c0 = p.add("c0", randn({kBatch, kHidden}, rng, 0.5));
  std::vector<Tensor<double>> rh;
  for (std::size_t t = 0; t < kSteps; ++t) rh.push_back(randn({kBatch, kHidden}, rng));
  const Tensor<double> rc = randn({kBatch, kHidden}, rng);
  return nn::grad_check(
      [&](ParamSet<double>& ps, bool acc) {
        nn::LstmState<double> s{ps.value(h0), ps.value(c0)};
        std::vector<nn::LstmStepCache<double>> caches(kSteps);
        double loss = 0.0;
        for (std::size_t t = 0; t < kSteps; ++t) {
          Tensor<double> xt({kBatch, kIn});
          std::copy_n(ps.value(x).raw() + t * kBatch * kIn, kBatch * kIn, xt.raw());
          s = nn::lstm_step(ps, layer, xt, s, &caches[t]);
          loss += project(s.h, rh[t]);
        }
        loss += project(s.c, rc);
        if (acc) {
          Tensor<double> dh({kBatch, kHidden}), dc = rc;
          for (std::size_t t = kSteps; t-- > 0;) {
            add_into(dh, rh[t]);
            const auto g = nn::lstm_step_backward(ps, layer, caches[t], dh, dc);
            for (std::size_t i = 0; i < g.dx.size(); ++i) ps.grad(x)[t * kBatch * kIn + i] += g.dx[i];
            dh = g.dh_prev;
            dc = g.dc_prev;
          }
          add_into(ps.grad(h0), dh);
          add_into(ps.grad(c0), dc);
        }
        return loss;
      },
      p, {.coords_per_param = 1000});
}

/// Options for losses that pass through ReLU: coordinates whose stencil
/// straddles a ReLU switch are skipped, and the step is sized so round-off on
/// an O(100) loss stays well below the tolerance.
inline nn::GradCheckOptions relu_options(std::size_t coords) {
  nn::GradCheckOptions o;
  o.step = 3e-5;
  o.abs_floor = 1e-4;
  o.coords_per_param = coords;
  o.skip_kinks = true;
  return o;
}

/// Adds N(0, scale) to every parameter so no bias sits exactly at a ReLU switch.
inline void jitter_params(ParamSet<double>& p, Rng& rng, double scale = 0.1) {
  std::normal_distribution<double> n(0.0, scale);
  for (auto& param : p)
    for (auto& v : param.value.data()) v += n(rng);
}

/// Full VAE objective (reconstruction + beta KL + auxiliary cross-entropy).
inline GradCheckReport check_vae(std::uint64_t seed = 6) {
  repr::VaeConfig cfg;
  cfg.latent_dim = 4;
  cfg.trunk.widths = {4, 4, 4, 8};
  cfg.decoder_channels = {4, 4};
  cfg.lambda_aux = 0.7;
  cfg.beta = 0.8;
  auto vae = std::make_shared<repr::Vae<double>>(cfg, chain3(), seed);
  Rng rng(seed);
  jitter_params(vae->params(), rng);
  const Tensor<double> x = randn({2, 25, 3, skeleton::kPackedChannels}, rng);
  const std::vector<int> labels{1, 4};
  return nn::grad_check(
      [vae, x, labels](ParamSet<double>&, bool acc) {
        Rng eps(11);
        return vae->loss(x, labels, eps, acc).total;
      },
      vae->params(), relu_options(40));
}

/// TD loss over a batch of steps from two short episodes, target network
/// distinct from the online one.
inline GradCheckReport check_td(std::uint64_t seed = 7) {
  Rng rng(seed);
  drqn::QNet<double> net({4, 5, 3}, seed);
  jitter_params(net.params(), rng, 0.05);
  ParamSet<double> target = net.params();
  jitter_params(target, rng, 0.3);
  std::vector<std::shared_ptr<const drqn::Episode<double>>> episodes;
  for (std::size_t len : {4u, 2u}) {
    auto e = std::make_shared<drqn::Episode<double>>();
    e->inputs = randn({len, 4}, rng);
    for (std::size_t t = 0; t < len; ++t) {
      e->actions.push_back(t % 3);
      e->rewards.push_back(t + 1 == len ? 1.5 : 0.0);
    }
    episodes.push_back(e);
  }
  std::vector<drqn::ExperienceRef<double>> batch{
      {episodes[0], 0}, {episodes[0], 2}, {episodes[0], 3}, {episodes[1], 0}, {episodes[1], 1}};
  return nn::grad_check(
      [&](ParamSet<double>& ps, bool acc) {
        return drqn::td_loss<double>(net, ps, target, batch, 0.9, acc);
      },
      net.params(), relu_options(60));
}

}  // namespace pbt::testing
