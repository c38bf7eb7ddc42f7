#include "pbt/btree/qnode.hpp"

#include "pbt/common.hpp"
#include "pbt/drqn/policy.hpp"

namespace pbt::btree {

TableLatents::TableLatents(std::shared_ptr<const drqn::LatentTable> table) : table_(std::move(table)) {
  require(table_ != nullptr, "TableLatents: null table");
}

std::vector<double> TableLatents::latent(const WindowObservation& window) {
  const auto z = table_->latent(window.key.session, window.key.phase, window.key.step);
  return {z.begin(), z.end()};
}

template <typename T>
EncoderLatents<T>::EncoderLatents(std::shared_ptr<const repr::Vae<T>> vae, repr::Normalizer normalizer,
                                  std::shared_ptr<const skeleton::SkeletonGraph> graph)
    : vae_(std::move(vae)), normalizer_(std::move(normalizer)), graph_(std::move(graph)) {
  require(vae_ && graph_, "EncoderLatents: encoder and graph are required");
  require(normalizer_.fitted(), "EncoderLatents: normalizer is not fitted");
}

template <typename T>
std::vector<double> EncoderLatents<T>::latent(const WindowObservation& window) {
  if (auto it = memo_.find(window.key); it != memo_.end()) return it->second;
  const std::vector<std::span<const skeleton::MotionFrame>> spans{window.frames};
  nn::Tensor<T> x = skeleton::to_graph_batch<T>(spans, *graph_);
  normalizer_.apply(x);
  const auto q = vae_->encode(x);
  ++calls_;
  std::vector<double> z(q.mean.values().begin(), q.mean.values().end());
  memo_.emplace(window.key, z);
  return z;
}

template <typename T>
DrqnValueFunction<T>::DrqnValueFunction(std::shared_ptr<const drqn::QNet<T>> net, std::shared_ptr<LatentSource> latents)
    : net_(std::move(net)), latents_(std::move(latents)) {
  require(net_ && latents_, "DrqnValueFunction: network and latent source are required");
  require(net_->config().input_dim == latents_->latent_dim() + kContextDim,
          "DrqnValueFunction: network input does not match latent + context width");
  reset();
}

template <typename T>
void DrqnValueFunction<T>::reset() {
  state_ = net_->initial_state(1);
}

template <typename T>
std::vector<double> DrqnValueFunction<T>::values(const WindowObservation& window, const Context& context) {
  const auto z = latents_->latent(window);
  nn::Tensor<T> x({1, net_->config().input_dim});
  std::size_t i = 0;
  for (double v : z) x[i++] = static_cast<T>(v);
  for (double v : context) x[i++] = static_cast<T>(v);
  const auto q = net_->step(x, state_);
  return {q.values().begin(), q.values().end()};
}

QValuePolicy::QValuePolicy(std::shared_ptr<ValueFunction> values, double v_min)
    : values_(std::move(values)), v_min_(v_min) {
  require(values_ != nullptr, "QValuePolicy: null value function");
}

sim::RobotAction QValuePolicy::decide(const WindowObservation& window, const Context& context) {
  const auto q = values_->values(window, context);
  require(q.size() == sim::RobotAction::kCount, "QValuePolicy: expected one value per robot action");
  return sim::RobotAction::from_index(drqn::gated_greedy_action(std::span<const double>(q), v_min_));
}

template class EncoderLatents<float>;
template class EncoderLatents<double>;
template class DrqnValueFunction<float>;
template class DrqnValueFunction<double>;

}  // namespace pbt::btree
