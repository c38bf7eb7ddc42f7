// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits non-zero when any fails. Pass criterion numbers to run a subset and
// --out DIR to keep the report tables (default: acceptance_out).

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <set>
#include <sstream>
#include <string>

#include "bt_trace.hpp"
#include "grad_toys.hpp"
#include "pbt/baselines/sweep.hpp"
#include "pbt/harness/experiments.hpp"
#include "reward_table.hpp"
#include "toy_mdp.hpp"

using namespace pbt;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v, int digits = 3) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(digits);
  os << v;
  return os.str();
}

using Clock = std::chrono::steady_clock;
double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

// ---- 1-3, 8: small deterministic checks --------------------------------------

Outcome gradients() {
  const auto t0 = Clock::now();
  const std::pair<const char*, std::function<nn::GradCheckReport()>> checks[] = {
      {"dense", [] { return testing::check_dense(); }},
      {"graph_conv", [] { return testing::check_graph_conv(); }},
      {"temporal_conv", [] { return testing::check_temporal_conv(2); }},
      {"temporal_conv_t", [] { return testing::check_temporal_conv_transpose(); }},
      {"lstm", [] { return testing::check_lstm(); }},
      {"vae_loss", [] { return testing::check_vae(); }},
      {"td_loss", [] { return testing::check_td(); }},
  };
  Outcome o{true, ""};
  for (const auto& [name, run] : checks) {
    const auto r = run();
    o.pass &= r.passed && r.max_relative_error < 1e-4;
    char buf[96];
    std::snprintf(buf, sizeof buf, "%s %.1e ", name, r.max_relative_error);
    o.detail += buf;
  }
  const double s = seconds_since(t0);
  o.pass &= s < 60.0;
  o.detail += "(" + fmt(s, 1) + " s)";
  return o;
}

Outcome reward_table() {
  const auto t0 = Clock::now();
  int exact = 0;
  for (const auto& r : testing::reward_rows()) {
    const double sign = r.cap > 0 ? 1.0 : -1.0;
    exact += sim::compute_reward(r.phase, r.action, 1.25) == sign * 1.25 &&
             sim::compute_reward(r.phase, r.action, 20.0) == r.cap &&
             sim::compute_reward(r.phase, r.action, std::abs(r.cap)) == r.cap;
  }
  sim::PhaseScript ph;
  ph.kind = {sim::PhaseType::BubbleWrap, 2, 1};
  ph.duration = 6.0;
  ph.cue_onset = 2.1;
  ph.t_trigger = 6.0;
  ph.frame_count = 150;
  const double wait = testing::wait_to_trigger(ph);
  const double s = seconds_since(t0);
  return {exact == 9 && wait == 0.0 && s < 1.0,
          std::to_string(exact) + "/9 rows exact, wait-at-trigger " + fmt(wait, 1)};
}

Outcome value_iteration() {
  const auto t0 = Clock::now();
  const auto r = testing::train_chain(1);
  const double s = seconds_since(t0);
  return {r.same_policy && r.max_abs_error < 0.05 && s < 120.0,
          std::string("policy ") + (r.same_policy ? "matches" : "differs") + ", max|Q-Q*| " + fmt(r.max_abs_error, 4) +
              " (" + fmt(s, 1) + " s)"};
}

Outcome bt_semantics() {
  using btree::NodeStatus;
  const auto trace = testing::hand_trace();
  const std::vector<NodeStatus> want{NodeStatus::Failure, NodeStatus::Failure, NodeStatus::Running, NodeStatus::Success};
  bool trace_ok = trace.run.trace.size() == want.size() && trace.run.phases.size() == 1 &&
                  std::abs(trace.run.phases[0].outcome.reward - 1.0) < 1e-12;
  for (std::size_t i = 0; trace_ok && i < want.size(); ++i) trace_ok = trace.run.trace[i].status == want[i];

  // Short-circuit: Sequence stops at Failure, Fallback at Success.
  int calls = 0;
  btree::Registry reg;
  reg.add_action("fail", [&](btree::Blackboard&) { ++calls; return NodeStatus::Failure; });
  reg.add_action("ok", [&](btree::Blackboard&) { ++calls; return NodeStatus::Success; });
  const auto pair = [](const char* a, const char* b) {
    std::vector<btree::NodePtr> v;
    v.push_back(std::make_unique<btree::Action>(a));
    v.push_back(std::make_unique<btree::Action>(b));
    return v;
  };
  btree::Blackboard bb;
  auto seq = btree::make_sequence(pair("fail", "ok"));
  bool short_ok = seq->tick(bb, reg) == NodeStatus::Failure && calls == 1;
  auto fb = btree::make_fallback(pair("ok", "fail"));
  short_ok &= fb->tick(bb, reg) == NodeStatus::Success && calls == 2;
  auto fb2 = btree::make_fallback(pair("fail", "ok"));
  short_ok &= fb2->tick(bb, reg) == NodeStatus::Success && calls == 4;

  // Q-node removed: the reactive plan alone saves no time.
  const auto sessions = sim::generate_sessions(sim::SimConfig{}, sim::session_seeds(8, "acceptance", 5));
  btree::Registry plain;
  btree::register_packaging_handles(plain);
  auto reactive = btree::build_reactive_tree();
  double total = 0.0;
  for (std::size_t i = 0; i < sessions.size(); ++i)
    total += btree::run_session(sessions[i], static_cast<std::uint32_t>(i), *reactive, plain).total_reward();

  return {trace_ok && short_ok && total == 0.0, std::string("trace ") + (trace_ok ? "ok" : "wrong") +
                                                    ", short-circuit " + (short_ok ? "ok" : "wrong") +
                                                    ", reactive return " + fmt(total, 1)};
}

// ---- 4-7: trained models on the default task ----------------------------------

harness::ExperimentConfig task_config(const fs::path& out) {
  // Default task; fewer DRQN iterations keep the whole suite within budget.
  auto cfg = harness::parse_config(
      "drqn.iterations = 40\n"
      "drqn.epsilon_decay_iterations = 25\n"
      "drqn.eval_interval = 5\n");
  cfg.out_dir = out;
  return cfg;
}

void save(const fs::path& path, CsvTable t, const harness::ExperimentConfig& cfg, std::string_view stage) {
  t.comments = harness::provenance(cfg, stage);
  harness::write_table(path, t);
}

struct Trained {
  explicit Trained(const harness::ExperimentConfig& cfg) : cfg(cfg), ws(cfg) {
    ws.log = [](std::string_view m) { std::cerr << "  [ws] " << m << "\n"; };
  }
  harness::ExperimentConfig cfg;
  harness::Workspace<float> ws;
};

Outcome proactivity(Trained& t) {
  const auto t0 = Clock::now();
  const auto r = harness::run_proactivity(t.ws);
  save(t.cfg.out_dir / "proactivity.csv", harness::proactivity_table(r), t.cfg, "proactivity");
  const double floor = 0.6 * r.oracle_return_1;
  const double s = seconds_since(t0);
  return {r.rl.mean > 1.0 && r.rl.mean >= floor && r.reactive == 0.0 && s < 1800.0,
          "drqn " + fmt(r.rl.mean) + " +- " + fmt(r.rl.std) + " over " + std::to_string(r.rl.values.size()) +
              " seeds, 60% of oracle(1) " + fmt(floor) + ", always-wait " + fmt(r.reactive, 1) + " (" + fmt(s / 60, 1) +
              " min)"};
}

Outcome benchmark(Trained& t) {
  const auto t0 = Clock::now();
  const auto r = harness::run_benchmark(t.ws);
  save(t.cfg.out_dir / "benchmark.csv", harness::benchmark_table(r), t.cfg, "benchmark");
  save(t.cfg.out_dir / "threshold_sweep.csv", baselines::sweep_table(r.sweep), t.cfg, "benchmark");
  Outcome o{true, ""};
  for (const auto& row : r.rows) {
    if (row.kind != "baseline") continue;
    o.pass &= row.gap.mean >= 0.0 && row.verdict != harness::Verdict::BaselineBetter;
    o.detail += row.method + " " + fmt(row.reward.mean) + " gap " + fmt(row.gap.mean) + " +- " + fmt(row.gap.std) + " " +
                std::string(harness::verdict_name(row.verdict)) + "; ";
  }
  const double s = seconds_since(t0);
  o.pass &= s < 3600.0;
  o.detail += "(" + fmt(s / 60, 1) + " min)";
  return o;
}

Outcome hparam_sweep(Trained& t) {
  const auto t0 = Clock::now();
  const auto cells = harness::run_hparam_sweep(t.ws);
  save(t.cfg.out_dir / "sweep_curves.csv", harness::sweep_curves_table(cells), t.cfg, "sweep");
  save(t.cfg.out_dir / "sweep_final.csv", harness::sweep_final_table(cells), t.cfg, "sweep");
  Outcome o{!cells.empty(), ""};
  double worst = std::numeric_limits<double>::infinity();
  for (const auto& c : cells) {
    o.pass &= c.final_reward.mean > 0.5;
    worst = std::min(worst, c.final_reward.mean);
  }
  o.detail = std::to_string(cells.size()) + " cells, lowest final mean " + fmt(worst) + " (" +
             fmt(seconds_since(t0) / 60, 1) + " min)";
  return o;
}

Outcome aux_null(Trained& t) {
  const auto t0 = Clock::now();
  const auto r = harness::run_aux_comparison(t.ws);
  save(t.cfg.out_dir / "aux_curves.csv", harness::aux_curves_table(r), t.cfg, "aux-compare");
  save(t.cfg.out_dir / "aux_summary.csv", harness::aux_summary_table(r), t.cfg, "aux-compare");
  return {r.within_band, "aux " + fmt(r.aux.mean) + " vs unsupervised " + fmt(r.unsupervised.mean) + ", |diff| " +
                             fmt(std::abs(r.difference)) + " vs band " + fmt(r.band) + " (" +
                             fmt(seconds_since(t0) / 60, 1) + " min)"};
}

// ---- 9: byte-identical reruns --------------------------------------------------

harness::ExperimentConfig tiny_config(const fs::path& out) {
  auto cfg = harness::parse_config(
      "replicates = 2\n"
      "data.train_sessions = 4\n"
      "data.eval_sessions = 2\n"
      "data.vae_sessions = 2\n"
      "data.classifier_sessions = 2\n"
      "vae.latent_dim = 4\n"
      "vae.trunk_widths = 4,4,4,8\n"
      "vae.decoder_channels = 4,4\n"
      "vae.epochs = 1\n"
      "qnet.hidden = 8\n"
      "drqn.iterations = 2\n"
      "drqn.updates_per_iteration = 2\n"
      "drqn.batch_size = 8\n"
      "drqn.episodes_per_iteration = 4\n"
      "baselines.feature_dim = 4\n"
      "baselines.lstm_hidden = 4\n"
      "baselines.dense_hidden = 4\n"
      "baselines.epochs = 1\n"
      "baselines.bootstrap_models = 2\n"
      "baselines.dropout_passes = 3\n"
      "baselines.taus = 0.05,inf\n"
      "sweep.latent_dims = 4\n"
      "sweep.hidden_sizes = 8\n");
  cfg.out_dir = out;
  return cfg;
}

std::map<std::string, std::string> csv_bytes(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.path().extension() != ".csv") continue;
    std::ifstream is(e.path(), std::ios::binary);
    out[fs::relative(e.path(), dir).string()] = {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
  }
  return out;
}

Outcome determinism(const fs::path& root) {
  const auto t0 = Clock::now();
  std::map<std::string, std::string> runs[2];
  for (int i = 0; i < 2; ++i) {
    const fs::path dir = root / ("determinism_" + std::to_string(i));
    fs::remove_all(dir);
    const auto cfg = tiny_config(dir);
    harness::stage_gen_data(cfg);
    harness::stage_train_vae(cfg);
    harness::stage_train_drqn(cfg);
    harness::stage_evaluate(cfg);
    harness::stage_proactivity(cfg);
    harness::stage_benchmark(cfg);
    harness::stage_sweep(cfg);
    harness::stage_aux_compare(cfg);
    runs[i] = csv_bytes(dir);
  }
  std::size_t same = 0;
  for (const auto& [name, bytes] : runs[0]) {
    const auto it = runs[1].find(name);
    same += it != runs[1].end() && it->second == bytes;
  }
  const bool ok = !runs[0].empty() && same == runs[0].size() && runs[0].size() == runs[1].size();
  return {ok, std::to_string(same) + "/" + std::to_string(runs[0].size()) + " CSV files identical across two runs (" +
                  fmt(seconds_since(t0), 1) + " s)"};
}

}  // namespace

int main(int argc, char** argv) {
  fs::path out = "acceptance_out";
  std::set<int> wanted;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--out" && i + 1 < argc)
      out = argv[++i];
    else
      wanted.insert(std::stoi(a));
  }
  const auto want = [&](int n) { return wanted.empty() || wanted.count(n) > 0; };
  fs::create_directories(out);

  std::unique_ptr<Trained> trained;
  const auto task = [&]() -> Trained& {
    if (!trained) trained = std::make_unique<Trained>(task_config(out / "task"));
    return *trained;
  };

  const std::pair<int, std::function<Outcome()>> criteria[] = {
      {1, gradients},
      {2, reward_table},
      {3, value_iteration},
      {4, [&] { return proactivity(task()); }},
      {5, [&] { return benchmark(task()); }},
      {6, [&] { return hparam_sweep(task()); }},
      {7, [&] { return aux_null(task()); }},
      {8, bt_semantics},
      {9, [&] { return determinism(out); }},
  };
  int failed = 0;
  for (const auto& [n, run] : criteria) {
    if (!want(n)) continue;
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    failed += !o.pass;
    std::cout << "criterion " << n << ": " << (o.pass ? "PASS" : "FAIL") << "  " << o.detail << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
