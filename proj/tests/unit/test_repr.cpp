#include <cmath>

#include "doctest.h"
#include "grad_toys.hpp"
#include "pbt/repr/normalizer.hpp"
#include "pbt/repr/train.hpp"
#include "pbt/sim/session.hpp"

using namespace pbt;
using nn::Tensor;

TEST_SUITE("repr") {

TEST_CASE("vae objective gradient check") {
  const auto r = testing::check_vae();
  INFO("worst " << r.worst_parameter << " rel " << r.max_relative_error << " skipped " << r.kinks_skipped);
  CHECK(r.passed);
  CHECK(r.max_relative_error < 1e-4);
}

TEST_CASE("kl term against the closed form") {
  repr::Posterior<double> q;
  q.mean = Tensor<double>({2, 2}, std::vector<double>{0.0, 1.0, -2.0, 0.5});
  q.logvar = Tensor<double>({2, 2}, std::vector<double>{0.0, std::log(4.0), -1.0, 0.0});
  // per row: 0.5 * sum(mu^2 + sigma^2 - 1 - log sigma^2), averaged over rows
  const double row0 = 0.5 * ((0 + 1 - 1 - 0) + (1 + 4 - 1 - std::log(4.0)));
  const double row1 = 0.5 * ((4 + std::exp(-1.0) - 1 + 1) + (0.25 + 1 - 1 - 0));
  CHECK(repr::kl_to_standard_normal(q) == doctest::Approx((row0 + row1) / 2));
  q.mean.fill(0.0);
  q.logvar.fill(0.0);
  CHECK(repr::kl_to_standard_normal(q) == 0.0);
}

TEST_CASE("decoder restores the window length") {
  repr::VaeConfig cfg;
  CHECK(cfg.decoder_output_frames() == 25);
  repr::Vae<float> vae(cfg, skeleton::default_skeleton(), 1);
  Rng rng(2);
  const auto x = nn::tensor_cast<float>(testing::randn({3, 25, 15, 6}, rng));
  const auto q = vae.encode(x);
  CHECK(q.mean.shape() == nn::Shape{3, 16});
  CHECK(vae.decode(q.mean).shape() == x.shape());
  cfg.decoder_stride = 3;
  CHECK_THROWS_AS(cfg.validate(), ContractViolation);
}

TEST_CASE("normalizer centres each joint channel and inverts") {
  Rng rng(3);
  Tensor<double> x = testing::randn({40, 5, 3, 6}, rng, 2.0);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] += static_cast<double>(i % 18);
  const Tensor<double> orig = x;
  const auto n = repr::Normalizer::fit(x);
  CHECK(n.mean.size() == 18);
  n.apply(x);
  for (std::size_t k = 0; k < 18; ++k) {
    double m = 0.0;
    for (std::size_t r = 0; r < x.size() / 18; ++r) m += x[r * 18 + k];
    CHECK(std::abs(m) < 1e-9);
  }
  // one pooled scale per channel
  CHECK(n.stddev[0] == n.stddev[6]);
  n.invert(x);
  double worst = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) worst = std::max(worst, std::abs(x[i] - orig[i]));
  CHECK(worst < 1e-9);
}

TEST_CASE("window dataset covers every complete window in order") {
  const auto sessions = sim::generate_sessions(sim::SimConfig{}, sim::session_seeds(1, "t", 2));
  const auto ds = repr::build_window_dataset<float>(sessions, skeleton::default_skeleton());
  CHECK(ds.size() == 2 * 38);
  CHECK(ds.windows.shape() == nn::Shape{76, 25, 15, 6});
  CHECK(ds.keys.front() == repr::WindowKey{0, 0, 0});
  CHECK(ds.keys[8] == repr::WindowKey{0, 1, 0});
  CHECK(std::is_sorted(ds.keys.begin(), ds.keys.end()));
  CHECK(ds.activity[0] == static_cast<int>(sim::Activity::Idle));
}

TEST_CASE("short training lowers the objective and is reproducible") {
  const auto sessions = sim::generate_sessions(sim::SimConfig{}, sim::session_seeds(2, "t", 3));
  auto ds = repr::build_window_dataset<float>(sessions, skeleton::default_skeleton());
  repr::Normalizer::fit(ds.windows).apply(ds.windows);
  repr::VaeConfig cfg;
  cfg.epochs = 3;
  cfg.latent_dim = 4;
  const auto a = repr::train_vae(ds.windows, skeleton::default_skeleton(), cfg, 7);
  const auto b = repr::train_vae(ds.windows, skeleton::default_skeleton(), cfg, 7);
  const repr::Vae<float> untrained(cfg, skeleton::default_skeleton(), 7);
  CHECK(repr::reconstruction_mse(a.model, ds.windows) < repr::reconstruction_mse(untrained, ds.windows));
  CHECK(a.trace.epochs.back().total < a.trace.epochs.front().total);
  CHECK(a.model.params().values_equal(b.model.params()));
  const auto z = repr::encode_means(a.model, ds.windows);
  CHECK(z.shape() == nn::Shape{ds.size(), 4});
  CHECK(z.all_finite());
}

}  // TEST_SUITE
