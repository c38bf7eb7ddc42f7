#include "pbt/numcore/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace pbt::nn {
namespace {

double checked_loss(const LossFunction& fn, ParamSet<double>& params, bool grads) {
  const double loss = fn(params, grads);
  require(std::isfinite(loss), "grad_check: loss is not finite");
  return loss;
}

}  // namespace

GradCheckReport grad_check(const LossFunction& loss_fn, ParamSet<double>& params, const GradCheckOptions& options) {
  params.zero_grads();
  checked_loss(loss_fn, params, true);

  std::mt19937_64 rng(options.seed);
  GradCheckReport report;
  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    auto& p = params[pi];
    std::vector<std::size_t> coords(p.value.size());
    std::iota(coords.begin(), coords.end(), std::size_t{0});
    if (coords.size() > options.coords_per_param) {
      std::shuffle(coords.begin(), coords.end(), rng);
      coords.resize(options.coords_per_param);
    }
    for (std::size_t k : coords) {
      const double original = p.value[k];
      const auto central = [&](double h) {
        p.value[k] = original + h;
        const double up = checked_loss(loss_fn, params, false);
        p.value[k] = original - h;
        const double down = checked_loss(loss_fn, params, false);
        p.value[k] = original;
        return (up - down) / (2.0 * h);
      };
      const double numeric = central(options.step);
      const double analytic = p.grad[k];
      if (options.skip_kinks) {
        const double half = central(options.step / 2.0);
        const double scale = std::max({std::abs(numeric), std::abs(half), options.abs_floor});
        if (std::abs(numeric - half) > options.kink_tol * scale) {
          ++report.kinks_skipped;
          continue;
        }
      }
      const double denom = std::max({std::abs(analytic), std::abs(numeric), options.abs_floor});
      const double rel = std::abs(analytic - numeric) / denom;
      ++report.coordinates_checked;
      if (report.worst_parameter.empty() || rel > report.max_relative_error) {
        report.max_relative_error = rel;
        report.worst_parameter = p.name;
        report.worst_index = k;
        report.worst_analytic = analytic;
        report.worst_numeric = numeric;
      }
    }
  }
  const double checked = static_cast<double>(report.coordinates_checked + report.kinks_skipped);
  report.passed = report.coordinates_checked > 0 && report.max_relative_error < options.rel_tol &&
                  static_cast<double>(report.kinks_skipped) <= options.max_kink_fraction * checked;
  return report;
}

}  // namespace pbt::nn
