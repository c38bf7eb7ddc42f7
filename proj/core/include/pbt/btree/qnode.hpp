#pragma once

#include <map>
#include <memory>
#include <vector>

#include "pbt/btree/node.hpp"
#include "pbt/drqn/packaging_env.hpp"
#include "pbt/drqn/qnet.hpp"
#include "pbt/repr/normalizer.hpp"
#include "pbt/repr/vae.hpp"

namespace pbt::btree {

/// Maps an offered window to its latent representation.
class LatentSource {
 public:
  virtual ~LatentSource() = default;
  virtual std::vector<double> latent(const WindowObservation& window) = 0;
  virtual std::size_t latent_dim() const = 0;
};

/// Latents precomputed for a fixed list of sessions, looked up by window key.
class TableLatents final : public LatentSource {
 public:
  explicit TableLatents(std::shared_ptr<const drqn::LatentTable> table);
  std::vector<double> latent(const WindowObservation& window) override;
  std::size_t latent_dim() const override { return table_->latent_dim; }

 private:
  std::shared_ptr<const drqn::LatentTable> table_;
};

/// Runs the frozen encoder on the raw window (posterior mean), memoized by key.
template <typename T>
class EncoderLatents final : public LatentSource {
 public:
  EncoderLatents(std::shared_ptr<const repr::Vae<T>> vae, repr::Normalizer normalizer,
                 std::shared_ptr<const skeleton::SkeletonGraph> graph);
  std::vector<double> latent(const WindowObservation& window) override;
  std::size_t latent_dim() const override { return vae_->config().latent_dim; }
  std::size_t encoder_calls() const noexcept { return calls_; }

 private:
  std::shared_ptr<const repr::Vae<T>> vae_;
  repr::Normalizer normalizer_;
  std::shared_ptr<const skeleton::SkeletonGraph> graph_;
  std::map<repr::WindowKey, std::vector<double>> memo_;
  std::size_t calls_ = 0;
};

/// Per-step action values from the window history of the current phase.
class ValueFunction {
 public:
  virtual ~ValueFunction() = default;
  virtual void reset() = 0;
  virtual std::vector<double> values(const WindowObservation& window, const Context& context) = 0;
};

/// Recurrent Q-network over latent ‖ context.
template <typename T>
class DrqnValueFunction final : public ValueFunction {
 public:
  DrqnValueFunction(std::shared_ptr<const drqn::QNet<T>> net, std::shared_ptr<LatentSource> latents);
  void reset() override;
  std::vector<double> values(const WindowObservation& window, const Context& context) override;

 private:
  std::shared_ptr<const drqn::QNet<T>> net_;
  std::shared_ptr<LatentSource> latents_;
  drqn::QState<T> state_;
};

/// Gated argmax over values: act only when the best action is not Wait and
/// its value exceeds v_min.
class QValuePolicy final : public DecisionPolicy {
 public:
  explicit QValuePolicy(std::shared_ptr<ValueFunction> values, double v_min = 0.0);
  void reset() override { values_->reset(); }
  sim::RobotAction decide(const WindowObservation& window, const Context& context) override;
  double v_min() const noexcept { return v_min_; }

 private:
  std::shared_ptr<ValueFunction> values_;
  double v_min_;
};

}  // namespace pbt::btree
