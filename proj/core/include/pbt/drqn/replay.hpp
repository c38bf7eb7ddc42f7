#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "pbt/numcore/rng.hpp"
#include "pbt/numcore/tensor.hpp"

namespace pbt::drqn {

/// One finished episode: the observation at every visited decision step, the
/// action taken there and the reward received (0 except on the last step).
template <typename T>
struct Episode {
  nn::Tensor<T> inputs;  // [L x input_dim]
  std::vector<std::size_t> actions;
  std::vector<double> rewards;

  std::size_t length() const noexcept { return actions.size(); }
  void validate() const;
};

/// Experience i of an episode: the sequence up to step i (and i + 1 for the
/// bootstrap target), action a_i and reward r_i. The last step is terminal.
template <typename T>
struct ExperienceRef {
  std::shared_ptr<const Episode<T>> episode;
  std::size_t step = 0;

  bool terminal() const noexcept { return step + 1 == episode->length(); }
  std::size_t action() const { return episode->actions[step]; }
  double reward() const { return episode->rewards[step]; }
};

/// FIFO ring of experiences with uniform sampling (with replacement).
template <typename T>
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity = 20000);

  void add_episode(std::shared_ptr<const Episode<T>> episode);
  void add(ExperienceRef<T> e);
  std::vector<ExperienceRef<T>> sample(std::size_t n, Rng& rng) const;

  std::size_t size() const noexcept { return items_.size(); }
  std::size_t capacity() const noexcept { return capacity_; }
  const ExperienceRef<T>& operator[](std::size_t i) const { return items_.at(i); }

 private:
  std::size_t capacity_;
  std::size_t next_ = 0;
  std::vector<ExperienceRef<T>> items_;
};

}  // namespace pbt::drqn
