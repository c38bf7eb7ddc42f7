#pragma once

#include <string>
#include <vector>

#include "pbt/harness/pipeline.hpp"

namespace pbt::harness {

/// Mean and sample standard deviation across replicates.
struct SeedStats {
  std::vector<double> values;
  double mean = 0.0;
  double std = 0.0;
};
SeedStats seed_stats(std::vector<double> values);

/// Per-iteration mean/std across replicates; all curves must share one grid.
struct CurveSummary {
  std::vector<std::size_t> iterations;
  std::vector<double> mean;
  std::vector<double> std;
};
CurveSummary summarize_curves(const std::vector<std::vector<drqn::CurvePoint>>& curves);

struct ProactivityReport {
  SeedStats rl;
  double oracle_return_1 = 0.0;
  double reactive = 0.0;
};

template <typename T>
ProactivityReport run_proactivity(Workspace<T>& ws);
CsvTable proactivity_table(const ProactivityReport& r);

enum class Verdict { RlBetter, Tie, BaselineBetter };
std::string_view verdict_name(Verdict v);
/// Significant when the mean gap is more than two standard deviations from zero.
Verdict classify_gap(const SeedStats& gap);

struct BenchmarkRow {
  std::string kind;    // rl, baseline, reference
  std::string method;  // drqn, dropout, bootstrap, combined, always_wait
  double tau = 0.0;    // best threshold for baselines
  SeedStats reward;
  /// RL minus this row, per replicate.
  SeedStats gap;
  Verdict verdict = Verdict::Tie;
};

struct BenchmarkReport {
  std::vector<BenchmarkRow> rows;
  /// Threshold sweep averaged over replicates; std_reward is across replicates.
  std::vector<baselines::SweepRow> sweep;
};

/// Paired comparison on the shared evaluation sessions.
template <typename T>
BenchmarkReport run_benchmark(Workspace<T>& ws);
CsvTable benchmark_table(const BenchmarkReport& r);

struct SweepCell {
  std::size_t latent_dim = 0;
  std::size_t hidden = 0;
  CurveSummary curve;
  SeedStats final_reward;
};

template <typename T>
std::vector<SweepCell> run_hparam_sweep(Workspace<T>& ws);
CsvTable sweep_curves_table(const std::vector<SweepCell>& cells);
CsvTable sweep_final_table(const std::vector<SweepCell>& cells);

struct AuxReport {
  CurveSummary unsupervised_curve, aux_curve;
  SeedStats unsupervised, aux;
  double difference = 0.0;  // aux - unsupervised final means
  double band = 0.0;        // 2 x unsupervised std
  bool within_band = false;
};

template <typename T>
AuxReport run_aux_comparison(Workspace<T>& ws);
CsvTable aux_curves_table(const AuxReport& r);
CsvTable aux_summary_table(const AuxReport& r);

// ---- report stages (the CLI subcommands) ------------------------------------

/// Uses the sessions under out/data when present, otherwise regenerates them.
DataBundle data_for(const ExperimentConfig& cfg);

/// out/proactivity.csv
void stage_proactivity(const ExperimentConfig& cfg);
/// out/benchmark.csv and out/threshold_sweep.csv
void stage_benchmark(const ExperimentConfig& cfg);
/// out/sweep_curves.csv and out/sweep_final.csv
void stage_sweep(const ExperimentConfig& cfg);
/// out/aux_curves.csv and out/aux_summary.csv
void stage_aux_compare(const ExperimentConfig& cfg);

}  // namespace pbt::harness
