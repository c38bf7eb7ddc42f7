#pragma once

#include <cstddef>
#include <span>

#include "pbt/numcore/rng.hpp"

namespace pbt::drqn {

struct EnvStep {
  double reward = 0.0;
  bool terminal = false;
};

/// Episodic environment seen by the trainer. Observations are fixed-width
/// real vectors; actions are indices with 0 meaning Wait.
class Environment {
 public:
  virtual ~Environment() = default;

  virtual std::size_t observation_dim() const = 0;
  virtual std::size_t action_count() const = 0;

  /// Starts the next training episode; randomness comes from rng only.
  virtual void reset_train(Rng& rng) = 0;
  virtual std::size_t eval_episode_count() const = 0;
  /// Starts evaluation episode i of a fixed held-out set.
  virtual void reset_eval(std::size_t i) = 0;

  virtual void observe(std::span<double> out) const = 0;
  virtual EnvStep step(std::size_t action) = 0;
};

}  // namespace pbt::drqn
