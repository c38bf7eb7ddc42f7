#include "pbt/baselines/sweep.hpp"

#include <limits>

#include "pbt/btree/packaging.hpp"
#include "pbt/btree/session_runner.hpp"

namespace pbt::baselines {

std::vector<double> default_tau_grid() {
  return {0.01, 0.02, 0.05, 0.1, 0.2, 0.3, 0.5, std::numeric_limits<double>::infinity()};
}

template <typename T>
std::vector<SweepRow> threshold_sweep(const std::shared_ptr<EnsemblePredictor<T>>& predictor,
                                      std::span<const double> taus, std::span<const sim::Session> sessions) {
  require(!taus.empty(), "threshold_sweep: empty threshold grid");
  require(predictor != nullptr, "threshold_sweep: null predictor");
  const auto tree = btree::build_packaging_tree("baseline");
  std::vector<SweepRow> rows;
  for (double tau : taus) {
    btree::Registry reg;
    btree::register_packaging_handles(reg);
    reg.add_policy("baseline", std::make_shared<GatedPolicy<T>>(predictor, tau));
    const auto ev = btree::evaluate_tree(*tree, reg, sessions);
    rows.push_back({std::string(method_name(predictor->method())), tau, ev.mean_reward, ev.std_reward, ev.act_rate,
                    ev.error_rate});
  }
  return rows;
}

const SweepRow& best_row(std::span<const SweepRow> rows) {
  require(!rows.empty(), "best_row: no rows");
  const SweepRow* best = &rows.front();
  for (const auto& r : rows)
    if (r.mean_reward > best->mean_reward) best = &r;
  return *best;
}

CsvTable sweep_table(std::span<const SweepRow> rows) {
  CsvTable t;
  t.header = {"method", "tau", "mean_reward", "std_reward", "act_rate", "error_rate"};
  for (const auto& r : rows)
    t.add_row({r.method, format_real(r.tau), format_real(r.mean_reward), format_real(r.std_reward),
               format_real(r.act_rate), format_real(r.error_rate)});
  return t;
}

template std::vector<SweepRow> threshold_sweep(const std::shared_ptr<EnsemblePredictor<float>>&, std::span<const double>,
                                               std::span<const sim::Session>);
template std::vector<SweepRow> threshold_sweep(const std::shared_ptr<EnsemblePredictor<double>>&,
                                               std::span<const double>, std::span<const sim::Session>);

}  // namespace pbt::baselines
