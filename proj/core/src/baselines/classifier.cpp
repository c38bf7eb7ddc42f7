#include "pbt/baselines/classifier.hpp"

#include <algorithm>
#include <numeric>

#include "pbt/numcore/adam.hpp"
#include "pbt/numcore/ops.hpp"

namespace pbt::baselines {

void ClassifierConfig::validate() const {
  trunk.validate();
  require(feature_dim >= 1 && lstm_hidden >= 1 && dense_hidden >= 1, "classifier: layer widths must be >= 1");
  require(dropout >= 0.0 && dropout < 1.0, "classifier: dropout rate must lie in [0, 1)");
  require(classes >= 2, "classifier: need at least two classes");
  require(batch_phases >= 1, "classifier: batch size must be >= 1");
  require(learning_rate > 0.0, "classifier: learning rate must be positive");
}

template <typename T>
void PhaseSequences<T>::validate() const {
  require(size() > 0, "phase sequences: empty dataset");
  require(length.size() == size() && context.size() == size(), "phase sequences: mismatched fields");
  require(windows.rank() == 4 && labels.size() == windows.dim(0), "phase sequences: one label per window required");
  for (std::size_t i = 0; i < size(); ++i)
    require(length[i] >= 1 && first[i] + length[i] <= labels.size(), "phase sequences: sequence out of range");
}

template <typename T>
PhaseSequences<T> build_phase_sequences(std::span<const sim::Session> sessions, const skeleton::SkeletonGraph& graph,
                                        const repr::Normalizer& normalizer) {
  PhaseSequences<T> d;
  std::vector<std::span<const skeleton::MotionFrame>> spans;
  for (const auto& s : sessions) {
    const double w = s.window_seconds();
    for (std::size_t p = 0; p < s.script.phases.size(); ++p) {
      const auto& ph = s.script.phases[p];
      const std::size_t len = std::min(sim::decision_steps(ph, w), s.window_count(p));
      if (len == 0) continue;
      d.first.push_back(spans.size());
      d.length.push_back(len);
      d.context.push_back(btree::encode_context(btree::task_state_before(s.script, p)));
      for (std::size_t k = 0; k < len; ++k) {
        spans.push_back(s.window(p, k));
        d.labels.push_back(static_cast<int>(sim::action_label(ph, sim::decision_time(k, w)).index()));
      }
    }
  }
  require(!spans.empty(), "build_phase_sequences: no decision windows");
  d.windows = skeleton::to_graph_batch<T>(spans, graph);
  normalizer.apply(d.windows);
  return d;
}

template <typename T>
PhaseSequences<T> select_sequences(const PhaseSequences<T>& data, std::span<const std::size_t> rows) {
  PhaseSequences<T> out;
  std::vector<std::size_t> window_rows;
  for (auto r : rows) {
    require(r < data.size(), "select_sequences: row out of range");
    out.first.push_back(window_rows.size());
    out.length.push_back(data.length[r]);
    out.context.push_back(data.context[r]);
    for (std::size_t k = 0; k < data.length[r]; ++k) {
      window_rows.push_back(data.first[r] + k);
      out.labels.push_back(data.labels[data.first[r] + k]);
    }
  }
  out.windows = nn::gather_rows(data.windows, window_rows);
  return out;
}

template <typename T>
Classifier<T>::Classifier(const ClassifierConfig& cfg, const skeleton::SkeletonGraph& graph, std::uint64_t seed)
    : cfg_(cfg) {
  cfg_.validate();
  Rng rng(derive_seed(seed, "classifier-init"));
  trunk_ = repr::Trunk<T>(params_, "cls.trunk", cfg_.trunk, graph, rng);
  const std::size_t w = cfg_.trunk.output_width();
  wf_ = params_.add("cls.feat.w", nn::he_uniform<T>({w, cfg_.feature_dim}, w, rng));
  bf_ = params_.add("cls.feat.b", Tensor<T>({cfg_.feature_dim}));
  lstm_ = nn::LstmLayer::create(params_, "cls.lstm", cfg_.feature_dim + btree::kContextDim, cfg_.lstm_hidden, rng);
  w1_ = params_.add("cls.fc1.w", nn::he_uniform<T>({cfg_.lstm_hidden, cfg_.dense_hidden}, cfg_.lstm_hidden, rng));
  b1_ = params_.add("cls.fc1.b", Tensor<T>({cfg_.dense_hidden}));
  w2_ = params_.add("cls.fc2.w", nn::uniform_fan_in<T>({cfg_.dense_hidden, cfg_.classes}, cfg_.dense_hidden, rng));
  b2_ = params_.add("cls.fc2.b", Tensor<T>({cfg_.classes}));
}

template <typename T>
ClassifierState<T> Classifier<T>::initial_state(std::size_t batch) const {
  return {Tensor<T>({batch, cfg_.lstm_hidden}), Tensor<T>({batch, cfg_.lstm_hidden})};
}

template <typename T>
Tensor<T> Classifier<T>::features(const Tensor<T>& windows) const {
  return nn::relu(nn::dense_forward(trunk_.forward(params_, windows), params_.value(wf_), params_.value(bf_)));
}

namespace {

template <typename T>
Tensor<T> step_input(const Tensor<T>& feat, std::span<const btree::Context> ctx, const std::vector<std::size_t>& rows) {
  const std::size_t f = feat.dim(1), d = f + btree::kContextDim;
  Tensor<T> x({rows.size(), d});
  for (std::size_t r = 0; r < rows.size(); ++r) {
    std::copy_n(feat.raw() + rows[r] * f, f, x.raw() + r * d);
    for (std::size_t c = 0; c < btree::kContextDim; ++c) x(r, f + c) = static_cast<T>(ctx[r][c]);
  }
  return x;
}

template <typename T>
Tensor<T> resize_rows(const Tensor<T>& x, std::size_t n) {
  const std::size_t w = x.dim(1);
  Tensor<T> out({n, w});
  std::copy_n(x.raw(), std::min(n, x.dim(0)) * w, out.raw());
  return out;
}

}  // namespace

template <typename T>
Tensor<T> Classifier<T>::step(const Tensor<T>& features, std::span<const btree::Context> contexts,
                              ClassifierState<T>& state) const {
  require(features.rank() == 2 && features.dim(1) == cfg_.feature_dim && contexts.size() == features.dim(0),
          "classifier step: need one context per feature row");
  std::vector<std::size_t> rows(features.dim(0));
  std::iota(rows.begin(), rows.end(), 0);
  state = nn::lstm_step(params_, lstm_, step_input(features, contexts, rows), state);
  return nn::relu(nn::dense_forward(state.h, params_.value(w1_), params_.value(b1_)));
}

template <typename T>
Tensor<T> Classifier<T>::probabilities(const Tensor<T>& hidden, const Tensor<T>* mask) const {
  Tensor<T> in = hidden;
  if (mask) {
    require(mask->shape() == hidden.shape(), "classifier: dropout mask shape mismatch");
    for (std::size_t i = 0; i < in.size(); ++i) in[i] *= (*mask)[i];
  }
  return nn::softmax_rows(nn::dense_forward(in, params_.value(w2_), params_.value(b2_)));
}

template <typename T>
double Classifier<T>::loss(const PhaseSequences<T>& data, std::span<const std::size_t> seqs, Rng& dropout_rng,
                           bool accumulate_grads, std::size_t* correct) {
  require(!seqs.empty(), "classifier loss: empty batch");
  // Longest first so the rows active at step t are a prefix.
  std::vector<std::size_t> order(seqs.begin(), seqs.end());
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return data.length[a] > data.length[b]; });
  const std::size_t steps = data.length[order.front()];

  std::vector<std::size_t> window_rows, feat_start;
  for (auto s : order) {
    feat_start.push_back(window_rows.size());
    for (std::size_t k = 0; k < data.length[s]; ++k) window_rows.push_back(data.first[s] + k);
  }
  const std::size_t total = window_rows.size();
  repr::TrunkCache<T> tcache;
  const Tensor<T> x = nn::gather_rows(data.windows, window_rows);
  const Tensor<T> pooled = trunk_.forward(params_, x, accumulate_grads ? &tcache : nullptr);
  const Tensor<T> feat = nn::relu(nn::dense_forward(pooled, params_.value(wf_), params_.value(bf_)));

  struct StepCache {
    nn::LstmStepCache<T> lstm;
    Tensor<T> h, a1, mask, dropped, dlogits;
    std::vector<std::size_t> feat_rows;
  };
  std::vector<StepCache> cache(steps);
  std::vector<btree::Context> ctx;
  ClassifierState<T> state = initial_state(order.size());
  double loss_sum = 0.0;
  std::size_t hits = 0;
  for (std::size_t t = 0; t < steps; ++t) {
    auto& c = cache[t];
    ctx.clear();
    std::vector<int> labels;
    for (std::size_t r = 0; r < order.size() && data.length[order[r]] > t; ++r) {
      c.feat_rows.push_back(feat_start[r] + t);
      ctx.push_back(data.context[order[r]]);
      labels.push_back(data.labels[data.first[order[r]] + t]);
    }
    const std::size_t n = c.feat_rows.size();
    if (n < state.h.dim(0)) state = {resize_rows(state.h, n), resize_rows(state.c, n)};
    state = nn::lstm_step(params_, lstm_, step_input(feat, ctx, c.feat_rows), state, &c.lstm);
    c.h = state.h;
    c.a1 = nn::relu(nn::dense_forward(c.h, params_.value(w1_), params_.value(b1_)));
    c.dropped = nn::dropout_forward(c.a1, cfg_.dropout, dropout_rng, c.mask);
    const Tensor<T> logits = nn::dense_forward(c.dropped, params_.value(w2_), params_.value(b2_));
    Tensor<T> dl;
    const double l = nn::softmax_cross_entropy(logits, labels, accumulate_grads ? &dl : nullptr);
    const double wgt = static_cast<double>(n) / static_cast<double>(total);
    loss_sum += l * wgt;
    if (accumulate_grads) {
      for (std::size_t i = 0; i < dl.size(); ++i) dl[i] = static_cast<T>(static_cast<double>(dl[i]) * wgt);
      c.dlogits = std::move(dl);
    }
    for (std::size_t r = 0; r < n; ++r) {
      const T* row = logits.raw() + r * cfg_.classes;
      hits += static_cast<int>(std::max_element(row, row + cfg_.classes) - row) == labels[r];
    }
  }
  if (correct) *correct = hits;
  if (!accumulate_grads) return loss_sum;

  const std::size_t f = cfg_.feature_dim, d = f + btree::kContextDim;
  Tensor<T> dfeat({total, f});
  Tensor<T> dh({cache.back().feat_rows.size(), cfg_.lstm_hidden}), dc = dh;
  for (std::size_t t = steps; t-- > 0;) {
    auto& c = cache[t];
    const std::size_t n = c.feat_rows.size();
    if (dh.dim(0) < n) {
      dh = resize_rows(dh, n);
      dc = resize_rows(dc, n);
    }
    Tensor<T> dd = nn::dense_backward(c.dropped, params_.value(w2_), c.dlogits, params_.grad(w2_), params_.grad(b2_));
    for (std::size_t i = 0; i < dd.size(); ++i) dd[i] *= c.mask[i];
    dd = nn::relu_backward(c.a1, dd);
    Tensor<T> dht = nn::dense_backward(c.h, params_.value(w1_), dd, params_.grad(w1_), params_.grad(b1_));
    for (std::size_t i = 0; i < dht.size(); ++i) dht[i] += dh[i];
    auto back = nn::lstm_step_backward(params_, lstm_, c.lstm, dht, dc);
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t j = 0; j < f; ++j) dfeat(c.feat_rows[r], j) += back.dx[r * d + j];
    dh = std::move(back.dh_prev);
    dc = std::move(back.dc_prev);
  }
  dfeat = nn::relu_backward(feat, dfeat);
  const Tensor<T> dpooled = nn::dense_backward(pooled, params_.value(wf_), dfeat, params_.grad(wf_), params_.grad(bf_));
  trunk_.backward(params_, tcache, dpooled);
  return loss_sum;
}

template <typename T>
std::vector<ClassifierEpoch> fit_classifier(Classifier<T>& model, const PhaseSequences<T>& data,
                                               std::uint64_t seed) {
  data.validate();
  const auto& cfg = model.config();
  Rng shuffle_rng(derive_seed(seed, "classifier-shuffle"));
  Rng dropout_rng(derive_seed(seed, "classifier-dropout"));
  nn::AdamState<T> adam(model.params(), nn::AdamOptions{cfg.learning_rate});
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<ClassifierEpoch> out;
  for (std::size_t e = 0; e < cfg.epochs; ++e) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double loss = 0.0;
    std::size_t hits = 0, steps = 0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_phases) {
      const std::size_t len = std::min(cfg.batch_phases, order.size() - start);
      const std::span<const std::size_t> seqs(order.data() + start, len);
      std::size_t n = 0, c = 0;
      for (auto s : seqs) n += data.length[s];
      model.params().zero_grads();
      loss += model.loss(data, seqs, dropout_rng, true, &c) * static_cast<double>(n);
      nn::adam_step(model.params(), adam);
      hits += c;
      steps += n;
    }
    out.push_back({loss / static_cast<double>(steps), static_cast<double>(hits) / static_cast<double>(steps)});
  }
  return out;
}

template <typename T>
Classifier<T> train_classifier(const PhaseSequences<T>& data, const skeleton::SkeletonGraph& graph,
                               const ClassifierConfig& cfg, std::uint64_t seed) {
  Classifier<T> model(cfg, graph, seed);
  fit_classifier(model, data, seed);
  return model;
}

template <typename T>
std::vector<Classifier<T>> train_bootstrap(const PhaseSequences<T>& data, const skeleton::SkeletonGraph& graph,
                                           const ClassifierConfig& cfg, std::size_t k, std::uint64_t seed) {
  require(k >= 2, "train_bootstrap: need at least two models");
  data.validate();
  std::vector<Classifier<T>> models;
  for (std::size_t m = 0; m < k; ++m) {
    const std::uint64_t s = derive_seed(seed, "bootstrap", m);
    Rng rng(derive_seed(s, "resample"));
    std::uniform_int_distribution<std::size_t> pick(0, data.size() - 1);
    std::vector<std::size_t> rows(data.size());
    for (auto& r : rows) r = pick(rng);
    models.push_back(train_classifier(select_sequences(data, rows), graph, cfg, s));
  }
  return models;
}

template <typename T>
double post_cue_accuracy(const Classifier<T>& model, const PhaseSequences<T>& data) {
  data.validate();
  std::size_t hits = 0, count = 0;
  for (std::size_t s = 0; s < data.size(); ++s) {
    std::vector<std::size_t> rows(data.length[s]);
    std::iota(rows.begin(), rows.end(), data.first[s]);
    const Tensor<T> feat = model.features(nn::gather_rows(data.windows, rows));
    ClassifierState<T> st = model.initial_state(1);
    Tensor<T> f({1, model.config().feature_dim});
    for (std::size_t k = 0; k < rows.size(); ++k) {
      std::copy_n(feat.raw() + k * f.size(), f.size(), f.raw());
      const Tensor<T> p = model.probabilities(model.step(f, std::span(&data.context[s], 1), st), nullptr);
      const int label = data.labels[rows[k]];
      if (label == 0) continue;
      ++count;
      hits += static_cast<int>(std::max_element(p.raw(), p.raw() + p.size()) - p.raw()) == label;
    }
  }
  return count ? static_cast<double>(hits) / static_cast<double>(count) : 0.0;
}

#define PBT_INSTANTIATE(T)                                                                                         \
  template struct PhaseSequences<T>;                                                                               \
  template PhaseSequences<T> build_phase_sequences(std::span<const sim::Session>, const skeleton::SkeletonGraph&,  \
                                                   const repr::Normalizer&);                                       \
  template PhaseSequences<T> select_sequences(const PhaseSequences<T>&, std::span<const std::size_t>);             \
  template class Classifier<T>;                                                                                    \
  template std::vector<ClassifierEpoch> fit_classifier(Classifier<T>&, const PhaseSequences<T>&, std::uint64_t); \
  template Classifier<T> train_classifier(const PhaseSequences<T>&, const skeleton::SkeletonGraph&,                \
                                          const ClassifierConfig&, std::uint64_t);                                 \
  template std::vector<Classifier<T>> train_bootstrap(const PhaseSequences<T>&, const skeleton::SkeletonGraph&,    \
                                                      const ClassifierConfig&, std::size_t, std::uint64_t);         \
  template double post_cue_accuracy(const Classifier<T>&, const PhaseSequences<T>&);

PBT_INSTANTIATE(float)
PBT_INSTANTIATE(double)

}  // namespace pbt::baselines
