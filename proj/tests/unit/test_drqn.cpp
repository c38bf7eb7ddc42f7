#include <array>
#include <cmath>

#include "doctest.h"
#include "grad_toys.hpp"
#include "pbt/drqn/packaging_env.hpp"
#include "pbt/drqn/policy.hpp"
#include "pbt/drqn/replay.hpp"
#include "pbt/repr/train.hpp"
#include "toy_mdp.hpp"

using namespace pbt;
using nn::Tensor;

namespace {

std::shared_ptr<drqn::Episode<double>> episode(std::size_t len) {
  auto e = std::make_shared<drqn::Episode<double>>();
  e->inputs = Tensor<double>({len, 2});
  for (std::size_t t = 0; t < len; ++t) {
    e->actions.push_back(0);
    e->rewards.push_back(t + 1 == len ? 1.0 : 0.0);
  }
  return e;
}

}  // namespace

TEST_SUITE("drqn") {

TEST_CASE("td loss gradient check") {
  const auto r = testing::check_td();
  INFO("worst " << r.worst_parameter << " rel " << r.max_relative_error);
  CHECK(r.passed);
  CHECK(r.max_relative_error < 1e-4);
}

TEST_CASE("td loss value against an explicit unroll") {
  Rng rng(1);
  drqn::QNet<double> net({3, 4, 2}, 5);
  auto target = net.params();
  testing::jitter_params(target, rng, 0.2);
  auto e = std::make_shared<drqn::Episode<double>>();
  e->inputs = testing::randn({3, 3}, rng);
  e->actions = {1, 0, 1};
  e->rewards = {0.0, 0.0, 2.0};
  const std::vector<drqn::ExperienceRef<double>> batch{{e, 1}, {e, 2}};
  const double gamma = 0.8;
  const auto q_on = net.unroll(net.params(), e->inputs);
  const auto q_tg = net.unroll(target, e->inputs);
  const double y1 = gamma * std::max(q_tg(2, 0), q_tg(2, 1));
  const double expected = (std::pow(q_on(1, 0) - y1, 2) + std::pow(q_on(2, 1) - 2.0, 2)) / 2.0;
  auto online = net.params();
  CHECK(drqn::td_loss<double>(net, online, target, batch, gamma, false) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("recurrent learner recovers the value-iteration solution of a chain") {
  const auto r = testing::train_chain(1);
  CHECK(r.q_star[0][0] == doctest::Approx(2.43));
  CHECK(r.q_star[1][0] == doctest::Approx(2.7));
  CHECK(r.q_star[2][0] == doctest::Approx(3.0));
  CHECK(r.same_policy);
  CHECK(r.max_abs_error < 0.05);
}

TEST_CASE("replay sampling is uniform over stored steps") {
  drqn::ReplayBuffer<double> buf(10);
  buf.add_episode(episode(10));
  Rng rng(3);
  std::array<int, 10> counts{};
  const int n = 100000;
  for (const auto& e : buf.sample(n, rng)) ++counts[e.step];
  double chi2 = 0.0;
  for (int c : counts) chi2 += (c - n / 10.0) * (c - n / 10.0) / (n / 10.0);
  CHECK(chi2 < 27.9);  // 99.9th percentile, 9 degrees of freedom
}

TEST_CASE("replay overwrites the oldest steps when full") {
  drqn::ReplayBuffer<double> buf(4);
  const auto a = episode(3), b = episode(3);
  buf.add_episode(a);
  buf.add_episode(b);
  CHECK(buf.size() == 4);
  CHECK(buf[0].episode == b);
  CHECK(buf[1].episode == b);
  CHECK(buf[2].episode == a);
  CHECK(buf[2].step == 2);
  CHECK(buf[3].episode == b);
  CHECK(buf[3].terminal() == false);
  CHECK(buf[1].terminal());
  Rng rng(1);
  drqn::ReplayBuffer<double> empty(4);
  CHECK_THROWS_AS(empty.sample(1, rng), ContractViolation);
}

TEST_CASE("action selection rules") {
  const std::vector<double> v{0.2, 1.5, 1.5, -3.0};
  CHECK(drqn::greedy_action<double>(v) == 1);
  CHECK(drqn::gated_greedy_action<double>(v, 0.0) == 1);
  CHECK(drqn::gated_greedy_action<double>(v, 2.0) == 0);
  const std::vector<double> waiting{3.0, 1.0};
  CHECK(drqn::gated_greedy_action<double>(waiting, -10.0) == 0);
  Rng rng(2);
  int random = 0;
  for (int i = 0; i < 2000; ++i) random += drqn::act_epsilon_greedy<double>(v, 1.0, rng) != 1;
  CHECK(random > 1200);
  for (int i = 0; i < 100; ++i) CHECK(drqn::act_epsilon_greedy<double>(v, 0.0, rng) == 1);
  CHECK(drqn::linear_epsilon(0, 1.0, 0.1, 10) == 1.0);
  CHECK(drqn::linear_epsilon(5, 1.0, 0.1, 10) == doctest::Approx(0.55));
  CHECK(drqn::linear_epsilon(50, 1.0, 0.1, 10) == doctest::Approx(0.1));
}

TEST_CASE("packaging environment: always waiting earns nothing") {
  auto sessions = std::make_shared<const std::vector<sim::Session>>(
      sim::generate_sessions(sim::SimConfig{}, sim::session_seeds(4, "e", 2)));
  const auto graph = skeleton::default_skeleton();
  const auto ds = repr::build_window_dataset<double>(*sessions, graph);
  Tensor<double> latents({ds.size(), 2});
  for (std::size_t i = 0; i < ds.size(); ++i) latents(i, 0) = static_cast<double>(i);
  auto table = std::make_shared<const drqn::LatentTable>(
      drqn::make_latent_table<double>(ds.keys, latents, *sessions));
  CHECK(table->latent(1, 0, 0)[0] == 38.0);
  drqn::PackagingEnv env(sessions, table, sessions, table);
  CHECK(env.observation_dim() == 2 + btree::kContextDim);
  CHECK(env.eval_episode_count() == 12);
  double total = 0.0;
  std::vector<double> obs(env.observation_dim());
  for (std::size_t i = 0; i < env.eval_episode_count(); ++i) {
    env.reset_eval(i);
    for (bool done = false; !done;) {
      env.observe(obs);
      const auto s = env.step(0);
      total += s.reward;
      done = s.terminal;
    }
  }
  CHECK(total == 0.0);
}

}  // TEST_SUITE
