#include "pbt/harness/experiments.hpp"

#include <cmath>
#include <filesystem>
#include <map>

namespace pbt::harness {

SeedStats seed_stats(std::vector<double> values) {
  SeedStats s;
  s.values = std::move(values);
  const double n = static_cast<double>(s.values.size());
  if (s.values.empty()) return s;
  for (double v : s.values) s.mean += v / n;
  if (s.values.size() > 1) {
    double ss = 0.0;
    for (double v : s.values) ss += (v - s.mean) * (v - s.mean);
    s.std = std::sqrt(ss / (n - 1.0));
  }
  return s;
}

CurveSummary summarize_curves(const std::vector<std::vector<drqn::CurvePoint>>& curves) {
  require(!curves.empty(), "summarize_curves: no curves");
  CurveSummary out;
  for (const auto& p : curves.front()) out.iterations.push_back(p.iteration);
  for (std::size_t i = 0; i < out.iterations.size(); ++i) {
    std::vector<double> v;
    for (const auto& c : curves) {
      require(c.size() == out.iterations.size() && c[i].iteration == out.iterations[i],
              "summarize_curves: curves use different iteration grids");
      v.push_back(c[i].mean_reward);
    }
    const auto s = seed_stats(std::move(v));
    out.mean.push_back(s.mean);
    out.std.push_back(s.std);
  }
  return out;
}

template <typename T>
ProactivityReport run_proactivity(Workspace<T>& ws) {
  const auto& cfg = ws.config();
  ProactivityReport r;
  std::vector<double> finals;
  for (std::size_t k = 0; k < cfg.replicates; ++k)
    finals.push_back(ws.drqn(cfg.vae.latent_dim, cfg.q_hidden, false, k).final_eval.mean_reward);
  r.rl = seed_stats(std::move(finals));
  for (const auto& s : *ws.data().eval) r.oracle_return_1 += sim::oracle_return(s.script, 1, s.window_seconds());
  r.oracle_return_1 /= static_cast<double>(ws.data().eval->size());
  r.reactive = ws.evaluate_reactive().mean_reward;
  return r;
}

CsvTable proactivity_table(const ProactivityReport& r) {
  CsvTable t;
  t.header = {"policy", "mean_reward", "std_reward", "replicates"};
  t.add_row({"drqn", format_real(r.rl.mean), format_real(r.rl.std), std::to_string(r.rl.values.size())});
  t.add_row({"reactive", format_real(r.reactive), "0", "1"});
  t.add_row({"oracle_reaction_1", format_real(r.oracle_return_1), "0", "1"});
  return t;
}

std::string_view verdict_name(Verdict v) {
  switch (v) {
    case Verdict::RlBetter:
      return "rl_better";
    case Verdict::Tie:
      return "tie";
    case Verdict::BaselineBetter:
      return "baseline_better";
  }
  return "?";
}

Verdict classify_gap(const SeedStats& gap) {
  if (gap.mean - 2.0 * gap.std > 0.0) return Verdict::RlBetter;
  if (gap.mean + 2.0 * gap.std < 0.0) return Verdict::BaselineBetter;
  return Verdict::Tie;
}

namespace {

BenchmarkRow compare(std::string kind, std::string method, double tau, std::vector<double> rewards,
                     const SeedStats& rl) {
  BenchmarkRow row{std::move(kind), std::move(method), tau, {}, {}, Verdict::Tie};
  std::vector<double> gaps;
  for (std::size_t i = 0; i < rewards.size(); ++i) gaps.push_back(rl.values.at(i) - rewards[i]);
  row.reward = seed_stats(std::move(rewards));
  row.gap = seed_stats(std::move(gaps));
  row.verdict = classify_gap(row.gap);
  return row;
}

}  // namespace

template <typename T>
BenchmarkReport run_benchmark(Workspace<T>& ws) {
  const auto& cfg = ws.config();
  std::vector<double> rl_values;
  for (std::size_t k = 0; k < cfg.replicates; ++k)
    rl_values.push_back(ws.drqn(cfg.vae.latent_dim, cfg.q_hidden, false, k).final_eval.mean_reward);
  const SeedStats rl = seed_stats(rl_values);

  // (method, tau index) -> per-replicate rows
  std::vector<std::vector<baselines::SweepRow>> per_rep;
  for (std::size_t k = 0; k < cfg.replicates; ++k) per_rep.push_back(ws.baselines(k).rows);

  BenchmarkReport rep;
  rep.rows.push_back(compare("rl", "drqn", 0.0, rl_values, rl));
  const std::size_t n_rows = per_rep.front().size();
  for (std::size_t i = 0; i < n_rows; ++i) {
    std::vector<double> m, act, err;
    for (const auto& rows : per_rep) {
      m.push_back(rows.at(i).mean_reward);
      act.push_back(rows[i].act_rate);
      err.push_back(rows[i].error_rate);
    }
    const auto ms = seed_stats(m);
    rep.sweep.push_back({per_rep.front()[i].method, per_rep.front()[i].tau, ms.mean, ms.std, seed_stats(act).mean,
                         seed_stats(err).mean});
  }
  const std::size_t n_tau = cfg.baselines.taus.size();
  for (std::size_t b = 0; b + n_tau <= rep.sweep.size(); b += n_tau) {
    const std::span<const baselines::SweepRow> block(rep.sweep.data() + b, n_tau);
    const auto& best = baselines::best_row(block);
    const std::size_t idx = b + static_cast<std::size_t>(&best - block.data());
    std::vector<double> rewards;
    for (const auto& rows : per_rep) rewards.push_back(rows[idx].mean_reward);
    rep.rows.push_back(compare("baseline", best.method, best.tau, std::move(rewards), rl));
  }
  const double wait = ws.evaluate_reactive().mean_reward;
  rep.rows.push_back(compare("reference", "always_wait", 0.0, std::vector<double>(cfg.replicates, wait), rl));
  return rep;
}

CsvTable benchmark_table(const BenchmarkReport& r) {
  CsvTable t;
  t.header = {"kind", "method", "tau", "mean_reward", "std_reward", "gap_mean", "gap_std", "verdict"};
  for (const auto& row : r.rows)
    t.add_row({row.kind, row.method, row.kind == "baseline" ? format_real(row.tau) : "", format_real(row.reward.mean),
               format_real(row.reward.std), format_real(row.gap.mean), format_real(row.gap.std),
               row.kind == "rl" ? "" : std::string(verdict_name(row.verdict))});
  return t;
}

template <typename T>
std::vector<SweepCell> run_hparam_sweep(Workspace<T>& ws) {
  const auto& cfg = ws.config();
  std::vector<SweepCell> cells;
  for (auto latent : cfg.sweep.latent_dims)
    for (auto hidden : cfg.sweep.hidden_sizes) {
      std::vector<std::vector<drqn::CurvePoint>> curves;
      std::vector<double> finals;
      for (std::size_t k = 0; k < cfg.replicates; ++k) {
        const auto& run = ws.drqn(latent, hidden, false, k);
        curves.push_back(run.curve);
        finals.push_back(run.final_eval.mean_reward);
      }
      cells.push_back({latent, hidden, summarize_curves(curves), seed_stats(std::move(finals))});
    }
  return cells;
}

CsvTable sweep_curves_table(const std::vector<SweepCell>& cells) {
  CsvTable t;
  t.header = {"latent_dim", "hidden", "iteration", "mean_reward", "std_reward", "seeds"};
  for (const auto& c : cells)
    for (std::size_t i = 0; i < c.curve.iterations.size(); ++i)
      t.add_row({std::to_string(c.latent_dim), std::to_string(c.hidden), std::to_string(c.curve.iterations[i]),
                 format_real(c.curve.mean[i]), format_real(c.curve.std[i]),
                 std::to_string(c.final_reward.values.size())});
  return t;
}

CsvTable sweep_final_table(const std::vector<SweepCell>& cells) {
  CsvTable t;
  t.header = {"latent_dim", "hidden", "final_mean_reward", "final_std_reward", "seeds"};
  for (const auto& c : cells)
    t.add_row({std::to_string(c.latent_dim), std::to_string(c.hidden), format_real(c.final_reward.mean),
               format_real(c.final_reward.std), std::to_string(c.final_reward.values.size())});
  return t;
}

template <typename T>
AuxReport run_aux_comparison(Workspace<T>& ws) {
  const auto& cfg = ws.config();
  AuxReport r;
  for (bool aux : {false, true}) {
    std::vector<std::vector<drqn::CurvePoint>> curves;
    std::vector<double> finals;
    for (std::size_t k = 0; k < cfg.replicates; ++k) {
      const auto& run = ws.drqn(cfg.vae.latent_dim, cfg.q_hidden, aux, k);
      curves.push_back(run.curve);
      finals.push_back(run.final_eval.mean_reward);
    }
    (aux ? r.aux_curve : r.unsupervised_curve) = summarize_curves(curves);
    (aux ? r.aux : r.unsupervised) = seed_stats(std::move(finals));
  }
  require(r.aux_curve.iterations == r.unsupervised_curve.iterations, "aux comparison: iteration grids differ");
  r.difference = r.aux.mean - r.unsupervised.mean;
  r.band = 2.0 * r.unsupervised.std;
  r.within_band = std::abs(r.difference) <= r.band;
  return r;
}

CsvTable aux_curves_table(const AuxReport& r) {
  CsvTable t;
  t.header = {"variant", "iteration", "mean_reward", "std_reward"};
  for (const auto& [name, c] : {std::pair{"unsupervised", &r.unsupervised_curve}, std::pair{"aux", &r.aux_curve}})
    for (std::size_t i = 0; i < c->iterations.size(); ++i)
      t.add_row({name, std::to_string(c->iterations[i]), format_real(c->mean[i]), format_real(c->std[i])});
  return t;
}

CsvTable aux_summary_table(const AuxReport& r) {
  CsvTable t;
  t.header = {"variant", "final_mean_reward", "final_std_reward", "difference", "band_2sigma", "within_band"};
  t.add_row({"unsupervised", format_real(r.unsupervised.mean), format_real(r.unsupervised.std), "", "", ""});
  t.add_row({"aux", format_real(r.aux.mean), format_real(r.aux.std), format_real(r.difference), format_real(r.band),
             r.within_band ? "1" : "0"});
  return t;
}

template ProactivityReport run_proactivity(Workspace<float>&);
template ProactivityReport run_proactivity(Workspace<double>&);
template BenchmarkReport run_benchmark(Workspace<float>&);
template BenchmarkReport run_benchmark(Workspace<double>&);
template std::vector<SweepCell> run_hparam_sweep(Workspace<float>&);
template std::vector<SweepCell> run_hparam_sweep(Workspace<double>&);
template AuxReport run_aux_comparison(Workspace<float>&);
template AuxReport run_aux_comparison(Workspace<double>&);

DataBundle data_for(const ExperimentConfig& cfg) {
  if (std::filesystem::exists(cfg.out_dir / "data" / "manifest.txt")) return load_data(cfg);
  return generate_data(cfg);
}

namespace {

template <typename T>
void proactivity_impl(const ExperimentConfig& cfg) {
  Workspace<T> ws(cfg, data_for(cfg));
  auto t = proactivity_table(run_proactivity(ws));
  t.comments = provenance(cfg, "proactivity");
  write_table(cfg.out_dir / "proactivity.csv", t);
}

template <typename T>
void benchmark_impl(const ExperimentConfig& cfg) {
  Workspace<T> ws(cfg, data_for(cfg));
  const auto r = run_benchmark(ws);
  auto t = benchmark_table(r);
  t.comments = provenance(cfg, "benchmark");
  write_table(cfg.out_dir / "benchmark.csv", t);
  auto s = baselines::sweep_table(r.sweep);
  s.comments = provenance(cfg, "benchmark");
  write_table(cfg.out_dir / "threshold_sweep.csv", s);
}

template <typename T>
void sweep_impl(const ExperimentConfig& cfg) {
  Workspace<T> ws(cfg, data_for(cfg));
  const auto cells = run_hparam_sweep(ws);
  auto c = sweep_curves_table(cells);
  c.comments = provenance(cfg, "sweep");
  write_table(cfg.out_dir / "sweep_curves.csv", c);
  auto f = sweep_final_table(cells);
  f.comments = provenance(cfg, "sweep");
  write_table(cfg.out_dir / "sweep_final.csv", f);
}

template <typename T>
void aux_impl(const ExperimentConfig& cfg) {
  Workspace<T> ws(cfg, data_for(cfg));
  const auto r = run_aux_comparison(ws);
  auto c = aux_curves_table(r);
  c.comments = provenance(cfg, "aux-compare");
  write_table(cfg.out_dir / "aux_curves.csv", c);
  auto s = aux_summary_table(r);
  s.comments = provenance(cfg, "aux-compare");
  write_table(cfg.out_dir / "aux_summary.csv", s);
}

template <template <typename> class Impl>
void dispatch(const std::string& stage, const ExperimentConfig& cfg) {
  run_stage(stage, [&] {
    cfg.validate();
    cfg.precision == 64 ? Impl<double>{}(cfg) : Impl<float>{}(cfg);
  });
}

template <typename T> struct Proactivity { void operator()(const ExperimentConfig& c) { proactivity_impl<T>(c); } };
template <typename T> struct Benchmark { void operator()(const ExperimentConfig& c) { benchmark_impl<T>(c); } };
template <typename T> struct Sweep { void operator()(const ExperimentConfig& c) { sweep_impl<T>(c); } };
template <typename T> struct Aux { void operator()(const ExperimentConfig& c) { aux_impl<T>(c); } };

}  // namespace

void stage_proactivity(const ExperimentConfig& cfg) { dispatch<Proactivity>("proactivity", cfg); }
void stage_benchmark(const ExperimentConfig& cfg) { dispatch<Benchmark>("benchmark", cfg); }
void stage_sweep(const ExperimentConfig& cfg) { dispatch<Sweep>("sweep", cfg); }
void stage_aux_compare(const ExperimentConfig& cfg) { dispatch<Aux>("aux-compare", cfg); }

}  // namespace pbt::harness
