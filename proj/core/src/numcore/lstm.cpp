#include "pbt/numcore/lstm.hpp"

#include <cmath>

#include "pbt/numcore/ops.hpp"

namespace pbt::nn {

template <typename T>
LstmState<T> lstm_step(const Tensor<T>& x, const Tensor<T>& h, const Tensor<T>& c, const Tensor<T>& w_x,
                       const Tensor<T>& w_h, const Tensor<T>& b, LstmStepCache<T>* cache) {
  require(x.rank() == 2 && h.rank() == 2 && c.rank() == 2, "lstm_step: x, h, c must be matrices");
  const std::size_t batch = x.dim(0), din = x.dim(1), hidden = h.dim(1);
  const std::size_t g4 = 4 * hidden;
  require(h.dim(0) == batch && c.shape() == h.shape(),
          "lstm_step: state shapes " + to_string(h.shape()) + " / " + to_string(c.shape()) +
              " do not conform to input " + to_string(x.shape()));
  require(w_x.rank() == 2 && w_x.dim(0) == din && w_x.dim(1) == g4,
          "lstm_step: input " + to_string(x.shape()) + " does not conform to w_x " + to_string(w_x.shape()));
  require(w_h.rank() == 2 && w_h.dim(0) == hidden && w_h.dim(1) == g4,
          "lstm_step: hidden " + to_string(h.shape()) + " does not conform to w_h " + to_string(w_h.shape()));
  require(b.size() == g4, "lstm_step: bias " + to_string(b.shape()) + " does not conform");

  Tensor<T> gates({batch, g4});
  auto gm = gates.matrix(batch, g4);
  gm.noalias() = x.matrix(batch, din) * w_x.matrix(din, g4);
  gm.noalias() += h.matrix(batch, hidden) * w_h.matrix(hidden, g4);
  gm.rowwise() += b.as_row();

  LstmState<T> next{Tensor<T>({batch, hidden}), Tensor<T>({batch, hidden})};
  Tensor<T> tanh_c({batch, hidden});
  for (std::size_t r = 0; r < batch; ++r) {
    T* gr = gates.raw() + r * g4;
    for (std::size_t j = 0; j < hidden; ++j) {
      const T i = sigmoid(gr[j]);
      const T f = sigmoid(gr[hidden + j]);
      const T g = std::tanh(gr[2 * hidden + j]);
      const T o = sigmoid(gr[3 * hidden + j]);
      gr[j] = i;
      gr[hidden + j] = f;
      gr[2 * hidden + j] = g;
      gr[3 * hidden + j] = o;
      const T cn = f * c[r * hidden + j] + i * g;
      const T tc = std::tanh(cn);
      next.c[r * hidden + j] = cn;
      tanh_c[r * hidden + j] = tc;
      next.h[r * hidden + j] = o * tc;
    }
  }
  if (cache) {
    cache->x = x;
    cache->h_prev = h;
    cache->c_prev = c;
    cache->gates = std::move(gates);
    cache->c = next.c;
    cache->tanh_c = std::move(tanh_c);
  }
  return next;
}

template <typename T>
LstmBackward<T> lstm_step_backward(const LstmStepCache<T>& cache, const Tensor<T>& w_x, const Tensor<T>& w_h,
                                   const Tensor<T>& dh, const Tensor<T>& dc, Tensor<T>& dw_x, Tensor<T>& dw_h,
                                   Tensor<T>& db) {
  const std::size_t batch = cache.x.dim(0), din = cache.x.dim(1), hidden = cache.h_prev.dim(1);
  const std::size_t g4 = 4 * hidden;
  require(dh.size() == batch * hidden && dc.size() == batch * hidden,
          "lstm_step_backward: gradient shapes do not conform to hidden state " + to_string(cache.h_prev.shape()));

  Tensor<T> dgates({batch, g4});
  LstmBackward<T> out;
  out.dc_prev = Tensor<T>({batch, hidden});
  for (std::size_t r = 0; r < batch; ++r) {
    const T* gr = cache.gates.raw() + r * g4;
    T* dg = dgates.raw() + r * g4;
    for (std::size_t j = 0; j < hidden; ++j) {
      const std::size_t k = r * hidden + j;
      const T i = gr[j], f = gr[hidden + j], g = gr[2 * hidden + j], o = gr[3 * hidden + j];
      const T tc = cache.tanh_c[k];
      const T dct = dc[k] + dh[k] * o * (T{1} - tc * tc);
      dg[j] = dct * g * i * (T{1} - i);
      dg[hidden + j] = dct * cache.c_prev[k] * f * (T{1} - f);
      dg[2 * hidden + j] = dct * i * (T{1} - g * g);
      dg[3 * hidden + j] = dh[k] * tc * o * (T{1} - o);
      out.dc_prev[k] = dct * f;
    }
  }
  const auto dgm = dgates.matrix(batch, g4);
  dw_x.matrix(din, g4).noalias() += cache.x.matrix(batch, din).transpose() * dgm;
  dw_h.matrix(hidden, g4).noalias() += cache.h_prev.matrix(batch, hidden).transpose() * dgm;
  db.as_row() += dgm.colwise().sum();
  out.dx = Tensor<T>({batch, din});
  out.dx.matrix(batch, din).noalias() = dgm * w_x.matrix(din, g4).transpose();
  out.dh_prev = Tensor<T>({batch, hidden});
  out.dh_prev.matrix(batch, hidden).noalias() = dgm * w_h.matrix(hidden, g4).transpose();
  return out;
}

template LstmState<float> lstm_step(const Tensor<float>&, const Tensor<float>&, const Tensor<float>&,
                                    const Tensor<float>&, const Tensor<float>&, const Tensor<float>&,
                                    LstmStepCache<float>*);
template LstmState<double> lstm_step(const Tensor<double>&, const Tensor<double>&, const Tensor<double>&,
                                     const Tensor<double>&, const Tensor<double>&, const Tensor<double>&,
                                     LstmStepCache<double>*);
template LstmBackward<float> lstm_step_backward(const LstmStepCache<float>&, const Tensor<float>&,
                                                const Tensor<float>&, const Tensor<float>&, const Tensor<float>&,
                                                Tensor<float>&, Tensor<float>&, Tensor<float>&);
template LstmBackward<double> lstm_step_backward(const LstmStepCache<double>&, const Tensor<double>&,
                                                 const Tensor<double>&, const Tensor<double>&,
                                                 const Tensor<double>&, Tensor<double>&, Tensor<double>&,
                                                 Tensor<double>&);

}  // namespace pbt::nn
