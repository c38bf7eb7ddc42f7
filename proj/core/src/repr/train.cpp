#include "pbt/repr/train.hpp"

#include <algorithm>
#include <numeric>

#include "pbt/numcore/adam.hpp"

namespace pbt::repr {

template <typename T>
WindowDataset<T> build_window_dataset(std::span<const sim::Session> sessions, const skeleton::SkeletonGraph& graph) {
  WindowDataset<T> ds;
  std::vector<std::span<const skeleton::MotionFrame>> spans;
  for (std::size_t s = 0; s < sessions.size(); ++s) {
    const auto& ses = sessions[s];
    const double w = ses.window_seconds();
    for (std::size_t p = 0; p < ses.script.phases.size(); ++p) {
      const auto& ph = ses.script.phases[p];
      for (std::size_t k = 0; k < ses.window_count(p); ++k) {
        spans.push_back(ses.window(p, k));
        ds.activity.push_back(static_cast<int>(sim::activity_label(ph, sim::decision_time(k, w), w)));
        ds.keys.push_back({static_cast<std::uint32_t>(s), static_cast<std::uint32_t>(p), static_cast<std::uint32_t>(k)});
      }
    }
  }
  require(!spans.empty(), "build_window_dataset: no complete windows");
  ds.windows = skeleton::to_graph_batch<T>(spans, graph);
  return ds;
}

template <typename T>
VaeTrace fit_vae(Vae<T>& vae, const Tensor<T>& windows, std::span<const int> labels, std::uint64_t seed) {
  const auto& cfg = vae.config();
  require(windows.rank() == 4 && windows.dim(0) > 0, "train_vae: empty dataset");
  const std::size_t n = windows.dim(0);
  require(labels.empty() || labels.size() == n,
          "train_vae: " + std::to_string(labels.size()) + " labels for " + std::to_string(n) + " windows");

  Rng shuffle_rng(derive_seed(seed, "vae-shuffle"));
  Rng noise_rng(derive_seed(seed, "vae-noise"));
  nn::AdamState<T> adam(vae.params(), nn::AdamOptions{cfg.learning_rate});
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::vector<int> batch_labels;

  VaeTrace trace;
  bool first = true;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    VaeEpochStats st;
    std::size_t seen = 0, aux_correct = 0, aux_count = 0;
    for (std::size_t start = 0; start < n; start += cfg.batch_size) {
      const std::size_t len = std::min(cfg.batch_size, n - start);
      const std::span<const std::size_t> rows(order.data() + start, len);
      const Tensor<T> x = nn::gather_rows(windows, rows);
      batch_labels.clear();
      for (auto r : rows)
        if (!labels.empty()) batch_labels.push_back(labels[r]);
      vae.params().zero_grads();
      const VaeLoss l = vae.loss(x, batch_labels, noise_rng, true);
      if (first) trace.initial_total = l.total;
      first = false;
      nn::adam_step(vae.params(), adam);
      const double wgt = static_cast<double>(len);
      st.total += l.total * wgt;
      st.recon += l.recon * wgt;
      st.kl += l.kl * wgt;
      st.aux += l.aux * wgt;
      aux_correct += l.aux_correct;
      aux_count += l.aux_count;
      seen += len;
    }
    const double inv = 1.0 / static_cast<double>(seen);
    st.total *= inv;
    st.recon *= inv;
    st.kl *= inv;
    st.aux *= inv;
    st.aux_accuracy = aux_count ? static_cast<double>(aux_correct) / static_cast<double>(aux_count) : 0.0;
    trace.epochs.push_back(st);
  }
  return trace;
}

template <typename T>
TrainedVae<T> train_vae(const Tensor<T>& windows, const skeleton::SkeletonGraph& graph, const VaeConfig& cfg,
                        std::uint64_t seed) {
  VaeConfig c = cfg;
  c.lambda_aux = 0.0;
  TrainedVae<T> out{Vae<T>(c, graph, seed), {}};
  out.trace = fit_vae(out.model, windows, {}, seed);
  return out;
}

template <typename T>
TrainedVae<T> train_vae_with_aux(const Tensor<T>& windows, std::span<const int> labels,
                                 const skeleton::SkeletonGraph& graph, const VaeConfig& cfg, double lambda_aux,
                                 std::uint64_t seed) {
  require(labels.size() == windows.dim(0), "train_vae_with_aux: " + std::to_string(labels.size()) +
                                               " labels for " + std::to_string(windows.dim(0)) + " windows");
  VaeConfig c = cfg;
  c.lambda_aux = lambda_aux;
  TrainedVae<T> out{Vae<T>(c, graph, seed), {}};
  out.trace = fit_vae(out.model, windows, labels, seed);
  return out;
}

namespace {
template <typename T, typename F>
void for_chunks(const Tensor<T>& windows, std::size_t chunk, F&& f) {
  require(chunk > 0, "chunk size must be positive");
  const std::size_t n = windows.dim(0);
  std::vector<std::size_t> rows;
  for (std::size_t start = 0; start < n; start += chunk) {
    const std::size_t len = std::min(chunk, n - start);
    rows.resize(len);
    std::iota(rows.begin(), rows.end(), start);
    f(start, nn::gather_rows(windows, std::span<const std::size_t>(rows)));
  }
}
}  // namespace

template <typename T>
Tensor<T> encode_means(const Vae<T>& vae, const Tensor<T>& windows, std::size_t chunk) {
  const std::size_t l = vae.config().latent_dim;
  Tensor<T> out({windows.dim(0), l});
  for_chunks(windows, chunk, [&](std::size_t start, const Tensor<T>& x) {
    const auto q = vae.encode(x);
    std::copy(q.mean.values().begin(), q.mean.values().end(), out.raw() + start * l);
  });
  return out;
}

template <typename T>
double reconstruction_mse(const Vae<T>& vae, const Tensor<T>& windows, std::size_t chunk) {
  double se = 0.0;
  for_chunks(windows, chunk, [&](std::size_t, const Tensor<T>& x) {
    const auto xhat = vae.decode(vae.encode(x).mean);
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double e = static_cast<double>(xhat[i]) - static_cast<double>(x[i]);
      se += e * e;
    }
  });
  return se / static_cast<double>(windows.size());
}

#define PBT_INSTANTIATE_TRAIN(T)                                                                                 \
  template WindowDataset<T> build_window_dataset(std::span<const sim::Session>, const skeleton::SkeletonGraph&); \
  template VaeTrace fit_vae(Vae<T>&, const Tensor<T>&, std::span<const int>, std::uint64_t);                      \
  template TrainedVae<T> train_vae(const Tensor<T>&, const skeleton::SkeletonGraph&, const VaeConfig&,           \
                                   std::uint64_t);                                                               \
  template TrainedVae<T> train_vae_with_aux(const Tensor<T>&, std::span<const int>, const skeleton::SkeletonGraph&, \
                                            const VaeConfig&, double, std::uint64_t);                            \
  template Tensor<T> encode_means(const Vae<T>&, const Tensor<T>&, std::size_t);                                 \
  template double reconstruction_mse(const Vae<T>&, const Tensor<T>&, std::size_t);

PBT_INSTANTIATE_TRAIN(float)
PBT_INSTANTIATE_TRAIN(double)

}  // namespace pbt::repr
