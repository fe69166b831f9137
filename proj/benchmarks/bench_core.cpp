// Micro-benchmarks for the hot paths: system generation, the random
// feature transform, the ridge solve, and closed-loop rollout.
//
//   ./rffrc_bench --benchmark_min_time=0.5

#include <benchmark/benchmark.h>

#include <Eigen/Dense>

#include "rffrc/feature_map.hpp"
#include "rffrc/forecaster.hpp"
#include "rffrc/ridge.hpp"
#include "rffrc/rng.hpp"
#include "rffrc/systems.hpp"
#include "rffrc/time_series.hpp"

namespace {

using namespace rffrc;

void bm_generate_lorenz(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(generate_lorenz63(n));
  }
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(bm_generate_lorenz)->Arg(4000)->Arg(40000);

void bm_generate_mackey_glass(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(generate_mackey_glass(n));
  }
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(bm_generate_mackey_glass)->Arg(4000);

void bm_generate_ks(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  KsParams params;
  params.transient_steps = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(generate_ks(n, params));
  }
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(bm_generate_ks)->Arg(500);

void bm_feature_transform(benchmark::State& state) {
  const Eigen::Index rows = state.range(0);
  const Eigen::Index input_dim = 15;  // three channels, k = 5
  const Eigen::Index m = state.range(1);
  const FeatureMap map = FeatureMap::sample(input_dim, m, 2.0, 1);
  Eigen::MatrixXd x(rows, input_dim);
  Rng rng(7);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < input_dim; ++c) x(r, c) = rng.normal();
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(map.transform(x));
  }
  state.SetItemsProcessed(state.iterations() * rows * m);
}
BENCHMARK(bm_feature_transform)
    ->Args({1024, 1000})
    ->Args({1024, 3000})
    ->Args({4096, 3000});

void bm_ridge_fit(benchmark::State& state) {
  const Eigen::Index n = 2400;
  const Eigen::Index m = state.range(0);
  Rng rng(3);
  Eigen::MatrixXd phi(n, m);
  Eigen::MatrixXd y(n, 3);
  for (Eigen::Index r = 0; r < n; ++r) {
    for (Eigen::Index c = 0; c < m; ++c) phi(r, c) = rng.normal();
    for (Eigen::Index c = 0; c < 3; ++c) y(r, c) = rng.normal();
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(ridge_fit(phi, y, 1e-6));
  }
}
BENCHMARK(bm_ridge_fit)->Arg(1000)->Arg(3000)->Unit(benchmark::kMillisecond);

void bm_train_end_to_end(benchmark::State& state) {
  const TimeSeries series = generate_lorenz63(4000);
  TimeSeries train;
  train.dt = series.dt;
  train.channel_names = series.channel_names;
  train.values = series.values.topRows(2400);
  ForecasterConfig config;
  config.k = 5;
  config.n_features = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(Forecaster::train(train, config));
  }
}
BENCHMARK(bm_train_end_to_end)
    ->Arg(1000)
    ->Arg(3000)
    ->Unit(benchmark::kMillisecond);

void bm_rollout(benchmark::State& state) {
  const TimeSeries series = generate_lorenz63(4000);
  TimeSeries train;
  train.dt = series.dt;
  train.channel_names = series.channel_names;
  train.values = series.values.topRows(2400);
  ForecasterConfig config;
  config.k = 5;
  config.n_features = 3000;
  const Forecaster model = Forecaster::train(train, config);
  const Eigen::MatrixXd warmup = series.values.middleRows(2400, config.k);
  const Eigen::Index horizon = state.range(0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(model.rollout(warmup, horizon));
  }
  state.SetItemsProcessed(state.iterations() * horizon);
}
BENCHMARK(bm_rollout)->Arg(100)->Arg(400)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
