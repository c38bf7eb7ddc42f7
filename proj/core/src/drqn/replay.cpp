#include "pbt/drqn/replay.hpp"

#include <random>

namespace pbt::drqn {

template <typename T>
void Episode<T>::validate() const {
  require(length() >= 1, "episode: needs at least one step");
  require(rewards.size() == length(), "episode: reward count does not match action count");
  require(inputs.rank() == 2 && inputs.dim(0) == length(), "episode: one input row per step required");
  for (std::size_t i = 0; i + 1 < length(); ++i)
    require(rewards[i] == 0.0, "episode: only the terminal step may carry reward");
}

template <typename T>
ReplayBuffer<T>::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  require(capacity >= 1, "replay: capacity must be >= 1");
  items_.reserve(capacity);
}

template <typename T>
void ReplayBuffer<T>::add(ExperienceRef<T> e) {
  require(e.episode && e.step < e.episode->length(), "replay: experience does not reference a valid step");
  if (items_.size() < capacity_) {
    items_.push_back(std::move(e));
  } else {
    items_[next_] = std::move(e);
  }
  next_ = (next_ + 1) % capacity_;
}

template <typename T>
void ReplayBuffer<T>::add_episode(std::shared_ptr<const Episode<T>> episode) {
  require(episode != nullptr, "replay: null episode");
  episode->validate();
  for (std::size_t i = 0; i < episode->length(); ++i) add(ExperienceRef<T>{episode, i});
}

template <typename T>
std::vector<ExperienceRef<T>> ReplayBuffer<T>::sample(std::size_t n, Rng& rng) const {
  require(!items_.empty(), "replay: cannot sample from an empty buffer");
  std::uniform_int_distribution<std::size_t> pick(0, items_.size() - 1);
  std::vector<ExperienceRef<T>> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(items_[pick(rng)]);
  return out;
}

template struct Episode<float>;
template struct Episode<double>;
template class ReplayBuffer<float>;
template class ReplayBuffer<double>;

}  // namespace pbt::drqn
