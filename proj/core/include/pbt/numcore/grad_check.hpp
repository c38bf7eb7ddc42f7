#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>

#include "pbt/numcore/params.hpp"

namespace pbt::nn {

/// Loss callback used by grad_check. When accumulate_grads is true the
/// callback must add dLoss/dParam into params' gradient buffers.
using LossFunction = std::function<double(ParamSet<double>& params, bool accumulate_grads)>;

struct GradCheckOptions {
  double rel_tol = 1e-4;
  double step = 1e-5;
  /// Coordinates sampled per parameter tensor (all of them when the tensor
  /// is smaller).
  std::size_t coords_per_param = 24;
  /// Denominator floor so that gradients that are both ~0 compare absolutely.
  double abs_floor = 1e-6;
  std::uint64_t seed = 7;
  /// Skip coordinates whose central differences at step and step/2 disagree
  /// by more than kink_tol: a ReLU switches inside the stencil there, so the
  /// finite difference does not estimate the one-sided analytic gradient.
  bool skip_kinks = false;
  double kink_tol = 1e-4;
  /// Largest tolerated fraction of skipped coordinates.
  double max_kink_fraction = 0.1;
};

struct GradCheckReport {
  double max_relative_error = 0.0;
  std::size_t coordinates_checked = 0;
  std::string worst_parameter;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  std::size_t kinks_skipped = 0;
  bool passed = false;
};

/// Compares analytic gradients against central finite differences on a
/// random subsample of coordinates. Throws ContractViolation if the loss is
/// not finite.
GradCheckReport grad_check(const LossFunction& loss_fn, ParamSet<double>& params,
                           const GradCheckOptions& options = {});

}  // namespace pbt::nn
