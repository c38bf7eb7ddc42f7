#include <cmath>
#include <random>

#include "doctest.h"
#include "grad_toys.hpp"
#include "pbt/numcore/adam.hpp"
#include "pbt/numcore/rng.hpp"

using namespace pbt;
using nn::Tensor;
using testing::randn;

namespace {

template <typename T>
Tensor<T> cast(const Tensor<double>& t) {
  return nn::tensor_cast<T>(t);
}

double max_abs_diff(const Tensor<double>& a, const Tensor<double>& b) {
  REQUIRE(a.shape() == b.shape());
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

double sigmoid(double v) { return 1.0 / (1.0 + std::exp(-v)); }

}  // namespace

TEST_SUITE("numcore") {

TEST_CASE("tensor keeps shape and data in step") {
  Tensor<double> t({2, 3, 4});
  CHECK(t.size() == 24);
  t(1, 2, 3) = 5.0;
  CHECK(t[1 * 12 + 2 * 4 + 3] == 5.0);
  t.reshape({6, 4});
  CHECK(t(5, 3) == 5.0);
  CHECK_THROWS_AS(t.reshape({5, 5}), ContractViolation);
  CHECK_THROWS_AS(Tensor<double>({2, 2}, std::vector<double>(3)), ContractViolation);
}

TEST_CASE("dense matches a triple loop") {
  Rng rng(1);
  const auto x = randn({5, 7}, rng), w = randn({7, 3}, rng), b = randn({3}, rng);
  Tensor<double> ref({5, 3});
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t o = 0; o < 3; ++o) {
      double s = b[o];
      for (std::size_t k = 0; k < 7; ++k) s += x(i, k) * w(k, o);
      ref(i, o) = s;
    }
  CHECK(max_abs_diff(nn::dense_forward(x, w, b), ref) < 1e-12);
  const auto yf = nn::dense_forward(cast<float>(x), cast<float>(w), cast<float>(b));
  CHECK(max_abs_diff(nn::tensor_cast<double>(yf), ref) < 1e-4);
}

TEST_CASE("graph convolution matches explicit sums") {
  Rng rng(2);
  const auto a = skeleton::normalized_adjacency<double>(testing::chain3());
  const auto x = randn({2, 4, 3, 5}, rng), w = randn({5, 2}, rng);
  Tensor<double> ref({2, 4, 3, 2});
  for (std::size_t b = 0; b < 2; ++b)
    for (std::size_t t = 0; t < 4; ++t)
      for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t o = 0; o < 2; ++o) {
          double s = 0.0;
          for (std::size_t j = 0; j < 3; ++j)
            for (std::size_t c = 0; c < 5; ++c) s += a(i, j) * x(b, t, j, c) * w(c, o);
          ref(b, t, i, o) = s;
        }
  CHECK(max_abs_diff(nn::graph_conv_forward(x, a, w), ref) < 1e-12);
}

TEST_CASE("normalized adjacency is symmetric with self loops") {
  const auto a = skeleton::normalized_adjacency<double>(testing::chain3());
  // degrees with self loops: 2, 3, 2
  CHECK(a(0, 0) == doctest::Approx(0.5));
  CHECK(a(1, 1) == doctest::Approx(1.0 / 3.0));
  CHECK(a(0, 1) == doctest::Approx(1.0 / std::sqrt(6.0)));
  CHECK(a(1, 0) == doctest::Approx(a(0, 1)));
  CHECK(a(0, 2) == 0.0);
}

TEST_CASE("temporal convolution matches explicit sums") {
  Rng rng(3);
  for (std::size_t stride : {1u, 2u}) {
    const auto x = randn({2, 9, 3, 4}, rng), k = randn({3, 4, 2}, rng);
    const std::size_t tout = (9 - 3) / stride + 1;
    CHECK(nn::temporal_output_length(9, 3, stride) == tout);
    Tensor<double> ref({2, tout, 3, 2});
    for (std::size_t b = 0; b < 2; ++b)
      for (std::size_t t = 0; t < tout; ++t)
        for (std::size_t j = 0; j < 3; ++j)
          for (std::size_t o = 0; o < 2; ++o) {
            double s = 0.0;
            for (std::size_t u = 0; u < 3; ++u)
              for (std::size_t c = 0; c < 4; ++c) s += x(b, t * stride + u, j, c) * k(u, c, o);
            ref(b, t, j, o) = s;
          }
    CHECK(max_abs_diff(nn::temporal_conv_forward(x, k, stride), ref) < 1e-12);
  }
}

TEST_CASE("transposed temporal convolution scatters each input frame") {
  Rng rng(4);
  const auto x = randn({1, 4, 2, 3}, rng), k = randn({3, 5, 2}, rng);
  const std::size_t stride = 2, tout = (4 - 1) * stride + 5;
  Tensor<double> ref({1, tout, 2, 2});
  for (std::size_t t = 0; t < 4; ++t)
    for (std::size_t u = 0; u < 5; ++u)
      for (std::size_t j = 0; j < 2; ++j)
        for (std::size_t c = 0; c < 3; ++c)
          for (std::size_t o = 0; o < 2; ++o) ref(0, t * stride + u, j, o) += x(0, t, j, c) * k(c, u, o);
  CHECK(max_abs_diff(nn::temporal_conv_transpose_forward(x, k, stride), ref) < 1e-12);
}

TEST_CASE("lstm step matches a scalar cell") {
  Rng rng(5);
  const std::size_t d = 3, h = 2;
  const auto x = randn({1, d}, rng), h0 = randn({1, h}, rng), c0 = randn({1, h}, rng);
  const auto wx = randn({d, 4 * h}, rng), wh = randn({h, 4 * h}, rng), b = randn({4 * h}, rng);
  const auto out = nn::lstm_step(x, h0, c0, wx, wh, b);
  for (std::size_t u = 0; u < h; ++u) {
    double z[4];
    for (std::size_t g = 0; g < 4; ++g) {
      const std::size_t col = g * h + u;
      z[g] = b[col];
      for (std::size_t k = 0; k < d; ++k) z[g] += x[k] * wx(k, col);
      for (std::size_t k = 0; k < h; ++k) z[g] += h0[k] * wh(k, col);
    }
    const double c = sigmoid(z[1]) * c0[u] + sigmoid(z[0]) * std::tanh(z[2]);
    CHECK(out.c[u] == doctest::Approx(c).epsilon(1e-12));
    CHECK(out.h[u] == doctest::Approx(sigmoid(z[3]) * std::tanh(c)).epsilon(1e-12));
  }
}

TEST_CASE("lstm init sets the forget bias to one") {
  Rng rng(6);
  nn::ParamSet<double> p;
  const auto l = nn::LstmLayer::create(p, "l", 3, 4, rng);
  const auto& b = p.value(l.b);
  for (std::size_t j = 0; j < 16; ++j) CHECK(b[j] == (j >= 4 && j < 8 ? 1.0 : 0.0));
}

TEST_CASE("adam follows the bias-corrected update") {
  nn::ParamSet<double> p;
  const auto id = p.add("w", Tensor<double>({2}, std::vector<double>{1.0, -2.0}));
  nn::AdamOptions o;
  o.learning_rate = 0.1;
  nn::AdamState<double> st(p, o);
  double w[2] = {1.0, -2.0}, m[2] = {0, 0}, v[2] = {0, 0};
  const double grads[3][2] = {{0.5, -1.0}, {0.2, 0.3}, {-0.7, 0.0}};
  for (int t = 1; t <= 3; ++t) {
    p.zero_grads();
    for (int i = 0; i < 2; ++i) p.grad(id)[i] = grads[t - 1][i];
    nn::adam_step(p, st);
    for (int i = 0; i < 2; ++i) {
      const double g = grads[t - 1][i];
      m[i] = 0.9 * m[i] + 0.1 * g;
      v[i] = 0.999 * v[i] + 0.001 * g * g;
      const double mh = m[i] / (1 - std::pow(0.9, t)), vh = v[i] / (1 - std::pow(0.999, t));
      w[i] -= 0.1 * mh / (std::sqrt(vh) + 1e-8);
      CHECK(p.value(id)[i] == doctest::Approx(w[i]).epsilon(1e-12));
    }
    CHECK(st.step == static_cast<std::uint64_t>(t));
  }
}

TEST_CASE("param set bookkeeping") {
  nn::ParamSet<double> p;
  const auto a = p.add("a", Tensor<double>({2, 2}, 1.0));
  CHECK_THROWS_AS(p.add("a", Tensor<double>({1})), ContractViolation);
  CHECK(p.grad(a).shape() == p.value(a).shape());
  p.grad(a).fill(3.0);
  p.zero_grads();
  for (double g : p.grad(a).data()) CHECK(g == 0.0);
}

TEST_CASE("softmax cross-entropy against hand computation") {
  Tensor<double> logits({2, 3}, std::vector<double>{1.0, 2.0, 3.0, 0.0, 0.0, 0.0});
  const std::vector<int> labels{2, -1};
  Tensor<double> d;
  const double loss = nn::softmax_cross_entropy(logits, labels, &d);
  const double z = std::exp(1.0) + std::exp(2.0) + std::exp(3.0);
  CHECK(loss == doctest::Approx(-std::log(std::exp(3.0) / z)));
  CHECK(d(0, 0) == doctest::Approx(std::exp(1.0) / z));
  CHECK(d(0, 2) == doctest::Approx(std::exp(3.0) / z - 1.0));
  CHECK(d(1, 0) == 0.0);
  const auto p = nn::softmax_rows(logits);
  CHECK(p(1, 1) == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("inverted dropout keeps the expectation") {
  Rng rng(7);
  Tensor<double> x({20000}, 1.0), mask;
  const auto y = nn::dropout_forward(x, 0.5, rng, mask);
  double mean = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    CHECK((mask[i] == 0.0 || mask[i] == 2.0));
    mean += y[i] / 20000.0;
  }
  CHECK(mean == doctest::Approx(1.0).epsilon(0.03));
  const auto same = nn::dropout_forward(x, 0.0, rng, mask);
  CHECK(same == x);
}

TEST_CASE("gradient checks on the layer kernels") {
  for (const auto& [name, r] :
       {std::pair{"dense", testing::check_dense()}, std::pair{"graph_conv", testing::check_graph_conv()},
        std::pair{"temporal_conv_s1", testing::check_temporal_conv(1)},
        std::pair{"temporal_conv_s2", testing::check_temporal_conv(2)},
        std::pair{"temporal_conv_transpose", testing::check_temporal_conv_transpose()},
        std::pair{"lstm_unrolled", testing::check_lstm()}}) {
    INFO(name << " worst " << r.worst_parameter << " rel " << r.max_relative_error);
    CHECK(r.passed);
    CHECK(r.max_relative_error < 1e-4);
  }
}

TEST_CASE("gradient check flags a wrong gradient") {
  Rng rng(8);
  nn::ParamSet<double> p;
  const auto w = p.add("w", randn({3}, rng));
  const auto r = nn::grad_check(
      [&](nn::ParamSet<double>& ps, bool acc) {
        double s = 0.0;
        for (std::size_t i = 0; i < 3; ++i) {
          s += ps.value(w)[i] * ps.value(w)[i];
          if (acc) ps.grad(w)[i] += 1.9 * ps.value(w)[i];  // should be 2x
        }
        return s;
      },
      p);
  CHECK_FALSE(r.passed);
  CHECK(r.max_relative_error > 0.01);
}

TEST_CASE("seed derivation is stable and stream-specific") {
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(derive_seed(1, "train") == derive_seed(1, "train"));
  CHECK(derive_seed(1, "train") != derive_seed(1, "eval"));
  CHECK(derive_seed(1, "train") != derive_seed(2, "train"));
  CHECK(derive_seed(1, "s", 0) != derive_seed(1, "s", 1));
}

}  // TEST_SUITE
