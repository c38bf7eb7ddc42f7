#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "pbt/baselines/uncertainty.hpp"
#include "pbt/csv.hpp"
#include "pbt/sim/session.hpp"

namespace pbt::baselines {

struct SweepRow {
  std::string method;
  double tau = 0.0;
  double mean_reward = 0.0;
  double std_reward = 0.0;
  double act_rate = 0.0;
  double error_rate = 0.0;
};

/// {0.01, 0.02, 0.05, 0.1, 0.2, 0.3, 0.5, inf}.
std::vector<double> default_tau_grid();

/// Evaluates one gated policy per threshold inside the packaging tree on the
/// given sessions. All thresholds share the predictor's memo.
template <typename T>
std::vector<SweepRow> threshold_sweep(const std::shared_ptr<EnsemblePredictor<T>>& predictor,
                                      std::span<const double> taus, std::span<const sim::Session> sessions);

/// Highest mean reward; ties go to the earliest row.
const SweepRow& best_row(std::span<const SweepRow> rows);

/// Columns: method, tau, mean_reward, std_reward, act_rate, error_rate.
CsvTable sweep_table(std::span<const SweepRow> rows);

}  // namespace pbt::baselines
