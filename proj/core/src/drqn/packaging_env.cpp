#include "pbt/drqn/packaging_env.hpp"

#include <algorithm>
#include <cstdint>
#include <random>

#include "pbt/common.hpp"

namespace pbt::drqn {

std::span<const double> LatentTable::latent(std::size_t session, std::size_t phase, std::size_t step) const {
  require(session < first_row.size() && phase < first_row[session].size(), "latent table: index out of range");
  const std::size_t row = first_row[session][phase] + step;
  require((row + 1) * latent_dim <= values.size(), "latent table: window out of range");
  return std::span<const double>(values).subspan(row * latent_dim, latent_dim);
}

template <typename T>
LatentTable make_latent_table(std::span<const repr::WindowKey> keys, const nn::Tensor<T>& latents,
                              std::span<const sim::Session> sessions) {
  require(latents.rank() == 2 && latents.dim(0) == keys.size(), "make_latent_table: one latent row per key required");
  LatentTable t;
  t.latent_dim = latents.dim(1);
  t.values.assign(latents.values().begin(), latents.values().end());
  t.first_row.resize(sessions.size());
  for (std::size_t s = 0; s < sessions.size(); ++s)
    t.first_row[s].assign(sessions[s].script.phases.size(), SIZE_MAX);
  for (std::size_t r = 0; r < keys.size(); ++r) {
    const auto& k = keys[r];
    require(k.session < sessions.size() && k.phase < t.first_row[k.session].size(),
            "make_latent_table: key outside the session list");
    if (k.step == 0) t.first_row[k.session][k.phase] = r;
  }
  for (std::size_t r = 0; r < keys.size(); ++r) {
    const auto& k = keys[r];
    require(t.first_row[k.session][k.phase] + k.step == r, "make_latent_table: windows of a phase must be contiguous");
  }
  for (const auto& rows : t.first_row)
    for (auto r : rows) require(r != SIZE_MAX, "make_latent_table: a phase has no windows");
  return t;
}

template LatentTable make_latent_table(std::span<const repr::WindowKey>, const nn::Tensor<float>&,
                                       std::span<const sim::Session>);
template LatentTable make_latent_table(std::span<const repr::WindowKey>, const nn::Tensor<double>&,
                                       std::span<const sim::Session>);

PackagingEnv::PackagingEnv(std::shared_ptr<const std::vector<sim::Session>> train_sessions,
                           std::shared_ptr<const LatentTable> train_latents,
                           std::shared_ptr<const std::vector<sim::Session>> eval_sessions,
                           std::shared_ptr<const LatentTable> eval_latents)
    : train_{std::move(train_sessions), std::move(train_latents)},
      eval_{std::move(eval_sessions), std::move(eval_latents)} {
  require(train_.sessions && train_.latents && !train_.sessions->empty(), "packaging env: no training sessions");
  require(eval_.sessions && eval_.latents, "packaging env: no evaluation sessions");
  require(train_.latents->latent_dim == eval_.latents->latent_dim, "packaging env: latent widths differ");
  require(train_.latents->first_row.size() == train_.sessions->size() &&
              eval_.latents->first_row.size() == eval_.sessions->size(),
          "packaging env: latent tables do not match the sessions");
  latent_dim_ = train_.latents->latent_dim;
  for (std::size_t s = 0; s < eval_.sessions->size(); ++s)
    for (std::size_t p = 0; p < (*eval_.sessions)[s].script.phases.size(); ++p) eval_index_.emplace_back(s, p);
}

void PackagingEnv::begin(const Source& src, std::size_t session, std::size_t phase) {
  const auto& ses = (*src.sessions)[session];
  src_ = &src;
  session_ = session;
  phase_ = phase;
  stream_.emplace(ses.script.phases[phase], ses.window_seconds());
  context_ = btree::encode_context(btree::task_state_before(ses.script, phase));
  require(!stream_->terminal(), "packaging env: phase has no decision steps");
}

void PackagingEnv::reset_train(Rng& rng) {
  if (!train_started_ || train_next_phase_ >= (*train_.sessions)[train_session_].script.phases.size()) {
    std::uniform_int_distribution<std::size_t> pick(0, train_.sessions->size() - 1);
    train_session_ = pick(rng);
    train_next_phase_ = 0;
    train_started_ = true;
  }
  begin(train_, train_session_, train_next_phase_++);
}

void PackagingEnv::reset_eval(std::size_t i) {
  require(i < eval_index_.size(), "packaging env: evaluation episode out of range");
  begin(eval_, eval_index_[i].first, eval_index_[i].second);
}

const sim::EpisodeStream& PackagingEnv::episode() const {
  require(stream_.has_value(), "packaging env: no active episode");
  return *stream_;
}

void PackagingEnv::observe(std::span<double> out) const {
  require(out.size() == observation_dim(), "packaging env: observation buffer has the wrong width");
  const auto& ep = episode();
  require(!ep.terminal(), "packaging env: episode is over");
  const auto z = src_->latents->latent(session_, phase_, ep.step_index());
  std::copy(z.begin(), z.end(), out.begin());
  std::copy(context_.begin(), context_.end(), out.begin() + static_cast<std::ptrdiff_t>(latent_dim_));
}

EnvStep PackagingEnv::step(std::size_t action) {
  require(stream_.has_value(), "packaging env: no active episode");
  const auto r = stream_->step(sim::RobotAction::from_index(action));
  return {r.reward, r.terminal};
}

}  // namespace pbt::drqn
