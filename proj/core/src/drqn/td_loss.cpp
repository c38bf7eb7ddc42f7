#include "pbt/drqn/td_loss.hpp"

#include <algorithm>
#include <numeric>

namespace pbt::drqn {

namespace {

template <typename T>
Tensor<T> head_rows(const Tensor<T>& x, std::size_t n) {
  const std::size_t w = x.size() / x.dim(0);
  Tensor<T> out({n, w});
  std::copy_n(x.raw(), n * w, out.raw());
  return out;
}

template <typename T>
Tensor<T> pad_rows(const Tensor<T>& x, std::size_t n) {
  const std::size_t w = x.dim(1);
  Tensor<T> out({n, w});
  std::copy_n(x.raw(), x.size(), out.raw());
  return out;
}

/// Sequences sorted by decreasing length so the rows active at step t form a prefix.
template <typename T>
struct SortedBatch {
  std::vector<std::size_t> order;  // batch index per sorted row
  std::vector<std::size_t> length;  // per sorted row
  std::vector<std::size_t> active;  // rows active per step
};

template <typename T>
SortedBatch<T> sort_batch(std::span<const ExperienceRef<T>> batch, const std::vector<std::size_t>& rows,
                          std::size_t extra) {
  SortedBatch<T> s;
  s.order = rows;
  std::stable_sort(s.order.begin(), s.order.end(),
                   [&](std::size_t a, std::size_t b) { return batch[a].step > batch[b].step; });
  for (auto i : s.order) s.length.push_back(batch[i].step + 1 + extra);
  const std::size_t max_len = s.length.empty() ? 0 : s.length.front();
  for (std::size_t t = 0; t < max_len; ++t)
    s.active.push_back(static_cast<std::size_t>(
        std::count_if(s.length.begin(), s.length.end(), [t](std::size_t l) { return l > t; })));
  return s;
}

template <typename T>
Tensor<T> inputs_at(std::span<const ExperienceRef<T>> batch, const SortedBatch<T>& s, std::size_t t,
                    std::size_t dim) {
  const std::size_t n = s.active[t];
  Tensor<T> x({n, dim});
  for (std::size_t r = 0; r < n; ++r) {
    const auto& in = batch[s.order[r]].episode->inputs;
    require(in.dim(1) == dim, "td_loss: episode input width does not match the network");
    std::copy_n(in.raw() + t * dim, dim, x.raw() + r * dim);
  }
  return x;
}

}  // namespace

template <typename T>
double td_loss(const QNet<T>& net, ParamSet<T>& online, const ParamSet<T>& target,
               std::span<const ExperienceRef<T>> batch, double gamma, bool accumulate_grads) {
  require(!batch.empty(), "td_loss: empty batch");
  require(gamma >= 0.0 && gamma <= 1.0, "td_loss: gamma must lie in [0, 1]");
  const std::size_t b = batch.size(), dim = net.config().input_dim, na = net.config().actions;

  // Bootstrap targets from the detached target network.
  std::vector<double> y(b);
  std::vector<std::size_t> all(b), boot;
  std::iota(all.begin(), all.end(), 0);
  for (std::size_t i = 0; i < b; ++i) {
    y[i] = batch[i].reward();
    if (!batch[i].terminal()) boot.push_back(i);
  }
  if (!boot.empty()) {
    const auto s = sort_batch(batch, boot, 1);
    QState<T> st = net.initial_state(s.active[0]);
    for (std::size_t t = 0; t < s.active.size(); ++t) {
      const std::size_t n = s.active[t];
      if (n < st.h.dim(0)) st = {head_rows(st.h, n), head_rows(st.c, n)};
      const Tensor<T> q = net.step(target, inputs_at(batch, s, t, dim), st);
      for (std::size_t r = 0; r < n; ++r) {
        if (s.length[r] != t + 1) continue;
        const T* row = q.raw() + r * na;
        y[s.order[r]] += gamma * static_cast<double>(*std::max_element(row, row + na));
      }
    }
  }

  // Online values at each experience's own step.
  const auto s = sort_batch(batch, all, 0);
  const std::size_t steps = s.active.size();
  std::vector<QStepCache<T>> caches(accumulate_grads ? steps : 0);
  std::vector<Tensor<T>> dq(accumulate_grads ? steps : 0);
  QState<T> st = net.initial_state(s.active[0]);
  double loss = 0.0;
  const double inv_b = 1.0 / static_cast<double>(b);
  for (std::size_t t = 0; t < steps; ++t) {
    const std::size_t n = s.active[t];
    if (n < st.h.dim(0)) st = {head_rows(st.h, n), head_rows(st.c, n)};
    const Tensor<T> q = net.step(online, inputs_at(batch, s, t, dim), st, accumulate_grads ? &caches[t] : nullptr);
    if (accumulate_grads) dq[t] = Tensor<T>({n, na});
    for (std::size_t r = 0; r < n; ++r) {
      if (s.length[r] != t + 1) continue;
      const std::size_t i = s.order[r], a = batch[i].action();
      require(a < na, "td_loss: action index out of range");
      const double err = static_cast<double>(q(r, a)) - y[i];
      loss += err * err;
      if (accumulate_grads) dq[t](r, a) = static_cast<T>(2.0 * err * inv_b);
    }
  }
  if (accumulate_grads) {
    const std::size_t h = net.config().hidden;
    Tensor<T> dh({s.active[steps - 1], h}), dc({s.active[steps - 1], h});
    for (std::size_t t = steps; t-- > 0;) {
      const std::size_t n = s.active[t];
      if (dh.dim(0) < n) {
        dh = pad_rows(dh, n);
        dc = pad_rows(dc, n);
      }
      auto back = net.step_backward(online, online, caches[t], dq[t], dh, dc);
      dh = std::move(back.dh_prev);
      dc = std::move(back.dc_prev);
    }
  }
  return loss * inv_b;
}

template double td_loss(const QNet<float>&, ParamSet<float>&, const ParamSet<float>&,
                        std::span<const ExperienceRef<float>>, double, bool);
template double td_loss(const QNet<double>&, ParamSet<double>&, const ParamSet<double>&,
                        std::span<const ExperienceRef<double>>, double, bool);

}  // namespace pbt::drqn
