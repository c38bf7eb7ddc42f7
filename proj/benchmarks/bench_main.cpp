#include <benchmark/benchmark.h>

#include <memory>
#include <random>

#include "pbt/btree/packaging.hpp"
#include "pbt/btree/session_runner.hpp"
#include "pbt/drqn/qnet.hpp"
#include "pbt/numcore/ops.hpp"
#include "pbt/repr/vae.hpp"
#include "pbt/sim/session.hpp"

using namespace pbt;
using nn::Tensor;

namespace {

template <typename T>
Tensor<T> noise(nn::Shape shape, std::uint64_t seed) {
  Tensor<T> t(std::move(shape));
  Rng rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  for (auto& v : t.data()) v = static_cast<T>(n(rng));
  return t;
}

template <typename T>
void BM_Dense(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto x = noise<T>({128, n}, 1), w = noise<T>({n, n}, 2), b = noise<T>({n}, 3);
  for (auto _ : state) benchmark::DoNotOptimize(nn::dense_forward(x, w, b));
}
BENCHMARK_TEMPLATE(BM_Dense, float)->Arg(64)->Arg(256);
BENCHMARK_TEMPLATE(BM_Dense, double)->Arg(64)->Arg(256);

void BM_GraphConv(benchmark::State& state) {
  const auto g = skeleton::default_skeleton();
  const auto a = skeleton::normalized_adjacency<float>(g);
  const auto x = noise<float>({32, 25, 15, 16}, 1), w = noise<float>({16, 32}, 2);
  for (auto _ : state) benchmark::DoNotOptimize(nn::graph_conv_forward(x, a, w));
}
BENCHMARK(BM_GraphConv);

void BM_TemporalConv(benchmark::State& state) {
  const auto x = noise<float>({32, 25, 15, 32}, 1), k = noise<float>({3, 32, 32}, 2);
  for (auto _ : state) benchmark::DoNotOptimize(nn::temporal_conv_forward(x, k, 2));
}
BENCHMARK(BM_TemporalConv);

void BM_QNetStep(benchmark::State& state) {
  const auto hidden = static_cast<std::size_t>(state.range(0));
  drqn::QNet<float> net({16 + 7, hidden, 6}, 1);
  auto s = net.initial_state(1);
  const auto x = noise<float>({1, 23}, 2);
  for (auto _ : state) benchmark::DoNotOptimize(net.step(x, s));
}
BENCHMARK(BM_QNetStep)->Arg(32)->Arg(64);

void BM_VaeEncodeWindow(benchmark::State& state) {
  const repr::Vae<float> vae(repr::VaeConfig{}, skeleton::default_skeleton(), 1);
  const auto x = noise<float>({1, 25, 15, skeleton::kPackedChannels}, 2);
  for (auto _ : state) benchmark::DoNotOptimize(vae.encode(x));
}
BENCHMARK(BM_VaeEncodeWindow);

void BM_ReactiveSession(benchmark::State& state) {
  const auto session = sim::generate_session(sim::SimConfig{}, 1);
  btree::Registry reg;
  btree::register_packaging_handles(reg);
  auto tree = btree::build_reactive_tree();
  for (auto _ : state) benchmark::DoNotOptimize(btree::run_session(session, 0, *tree, reg));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(session.frames.size()));
}
BENCHMARK(BM_ReactiveSession);

void BM_GenerateSession(benchmark::State& state) {
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(sim::generate_session(sim::SimConfig{}, ++seed));
}
BENCHMARK(BM_GenerateSession);

}  // namespace

BENCHMARK_MAIN();
