#include <cmath>
#include <limits>

#include "doctest.h"
#include "grad_toys.hpp"
#include "pbt/baselines/sweep.hpp"
#include "pbt/baselines/uncertainty.hpp"

using namespace pbt;
using baselines::Prediction;

namespace {

baselines::PhaseSequences<double> toy_sequences(Rng& rng) {
  baselines::PhaseSequences<double> d;
  d.windows = testing::randn({5, 25, 3, skeleton::kPackedChannels}, rng);
  d.first = {0, 3};
  d.length = {3, 2};
  btree::Context c0{}, c1{};
  c0[0] = 1.0;
  c1[2] = 1.0;
  c1[6] = 0.5;
  d.context = {c0, c1};
  d.labels = {0, 2, 2, 0, 5};
  return d;
}

}  // namespace

TEST_SUITE("baselines") {

TEST_CASE("sample aggregation") {
  const std::vector<std::vector<double>> two{{1.0, 0.0}, {0.0, 1.0}};
  const Prediction p = baselines::aggregate_samples(two);
  CHECK(p.probs[0] == doctest::Approx(0.5));
  CHECK(p.action == 0);
  CHECK(p.uncertainty == doctest::Approx(0.25));

  const std::vector<std::vector<double>> same{{0.2, 0.7, 0.1}, {0.2, 0.7, 0.1}};
  const Prediction q = baselines::aggregate_samples(same);
  CHECK(q.action == 1);
  CHECK(q.uncertainty == doctest::Approx(0.0));

  const std::vector<std::vector<double>> three{{0.9, 0.1}, {0.6, 0.4}, {0.3, 0.7}};
  const Prediction r = baselines::aggregate_samples(three);
  CHECK(r.probs[0] == doctest::Approx(0.6));
  CHECK(r.uncertainty == doctest::Approx(0.06));

  CHECK_THROWS_AS(baselines::aggregate_samples(std::vector<std::vector<double>>{}), ContractViolation);
  CHECK_THROWS_AS(baselines::aggregate_samples(std::vector<std::vector<double>>{{1.0}, {0.5, 0.5}}), ContractViolation);
}

TEST_CASE("uncertainty gate") {
  Prediction p;
  p.probs = {0.1, 0.0, 0.9, 0, 0, 0};
  p.action = 2;
  p.uncertainty = 0.05;
  CHECK(baselines::gated_act(0.1, p).index() == 2);
  CHECK(baselines::gated_act(0.05, p).index() == 2);
  CHECK(baselines::gated_act(0.01, p).is_wait());
  CHECK(baselines::gated_act(std::numeric_limits<double>::infinity(), p).is_wait());
  p.uncertainty = 0.0;
  p.action = 0;
  CHECK(baselines::gated_act(1.0, p).is_wait());
}

TEST_CASE("threshold grid and best row") {
  const auto taus = baselines::default_tau_grid();
  REQUIRE(taus.size() == 8);
  CHECK(taus.front() == 0.01);
  CHECK(std::isinf(taus.back()));
  for (std::size_t i = 1; i < taus.size(); ++i) CHECK(taus[i] > taus[i - 1]);
  const std::vector<baselines::SweepRow> rows{{"m", 0.1, 1.0}, {"m", 0.2, 2.0}, {"m", 0.3, 2.0}};
  CHECK(baselines::best_row(rows).tau == 0.2);
  const auto t = baselines::sweep_table(rows);
  CHECK(t.rows.size() == 3);
}

TEST_CASE("method names round trip") {
  for (auto m : {baselines::UncertaintyMethod::Dropout, baselines::UncertaintyMethod::Bootstrap,
                 baselines::UncertaintyMethod::Both})
    CHECK(baselines::parse_method(baselines::method_name(m)) == m);
  CHECK_THROWS(baselines::parse_method("bayes"));
}

TEST_CASE("classifier loss gradient check") {
  baselines::ClassifierConfig cfg;
  cfg.trunk.widths = {4, 4, 4, 8};
  cfg.feature_dim = 5;
  cfg.lstm_hidden = 4;
  cfg.dense_hidden = 4;
  cfg.dropout = 0.3;
  baselines::Classifier<double> model(cfg, testing::chain3(), 3);
  Rng rng(3);
  testing::jitter_params(model.params(), rng);
  const auto data = toy_sequences(rng);
  const std::vector<std::size_t> seqs{0, 1};
  const auto r = nn::grad_check(
      [&](nn::ParamSet<double>&, bool acc) {
        Rng drop(17);
        return model.loss(data, seqs, drop, acc);
      },
      model.params(), testing::relu_options(40));
  INFO("worst " << r.worst_parameter << " rel " << r.max_relative_error);
  CHECK(r.passed);
}

TEST_CASE("classifier learns a separable toy") {
  baselines::ClassifierConfig cfg;
  cfg.trunk.widths = {4, 4, 4, 8};
  cfg.feature_dim = 8;
  cfg.lstm_hidden = 8;
  cfg.dense_hidden = 8;
  cfg.dropout = 0.0;
  cfg.epochs = 60;
  cfg.batch_phases = 2;
  cfg.learning_rate = 1e-2;
  Rng rng(5);
  auto data = toy_sequences(rng);
  baselines::Classifier<double> model(cfg, testing::chain3(), 5);
  const auto epochs = baselines::fit_classifier(model, data, 5);
  CHECK(epochs.back().loss < epochs.front().loss);
  CHECK(epochs.back().accuracy == doctest::Approx(1.0));
}

}  // TEST_SUITE
