#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "hcov/grid_env.hpp"
#include "hcov/hilbert.hpp"
#include "hcov/mlp.hpp"

using namespace hcov;

namespace {

void BM_HilbertEncode(benchmark::State& state) {
  const int order = static_cast<int>(state.range(0));
  const int side = 1 << order;
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<int> coord(0, side - 1);
  std::vector<Cell> pts(1024);
  for (auto& c : pts) c = {coord(rng), coord(rng)};
  std::size_t i = 0;
  for (auto _ : state) {
    const Cell& c = pts[i++ & 1023];
    benchmark::DoNotOptimize(xy_to_index(c.x, c.y, order));
  }
}
BENCHMARK(BM_HilbertEncode)->Arg(4)->Arg(8)->Arg(12);

void BM_HilbertDecode(benchmark::State& state) {
  const int order = static_cast<int>(state.range(0));
  const std::uint64_t n = 1ull << (2 * order);
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<std::uint64_t> idx(0, n - 1);
  std::vector<std::uint64_t> ds(1024);
  for (auto& d : ds) d = idx(rng);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(d_to_xy(ds[i++ & 1023], order));
  }
}
BENCHMARK(BM_HilbertDecode)->Arg(4)->Arg(8)->Arg(12);

void BM_HilbertMapBuild(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  for (auto _ : state) {
    HilbertMap map(side, side);
    benchmark::DoNotOptimize(map.active_count());
  }
}
BENCHMARK(BM_HilbertMapBuild)->Arg(16)->Arg(64);

void BM_MlpForward(benchmark::State& state) {
  MlpNet net({76, 128, 128, 5}, 7);
  std::vector<double> x(76);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (auto& v : x) v = u(rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(net.forward(x));
  }
}
BENCHMARK(BM_MlpForward);

void BM_MlpForwardBackward(benchmark::State& state) {
  MlpNet net({76, 128, 128, 5}, 7);
  std::vector<double> x(76);
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (auto& v : x) v = u(rng);
  const std::vector<double> dLdy{0.1, -0.2, 0.3, -0.4, 0.5};
  for (auto _ : state) {
    ForwardCache cache;
    benchmark::DoNotOptimize(net.forward(x, cache));
    Gradients g = backward(net, cache, dLdy);
    benchmark::DoNotOptimize(g);
  }
}
BENCHMARK(BM_MlpForwardBackward);

void BM_EnvStep(benchmark::State& state) {
  EnvConfig cfg;
  cfg.width = 32;
  cfg.height = 32;
  cfg.n_agents = static_cast<int>(state.range(0));
  GridEnv env(cfg);
  env.reset(11);
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> act(0, kNumActions - 1);
  std::vector<Action> actions(cfg.n_agents);
  for (auto _ : state) {
    if (env.done()) {
      state.PauseTiming();
      env.reset(11);
      state.ResumeTiming();
    }
    for (auto& a : actions) a = static_cast<Action>(act(rng));
    benchmark::DoNotOptimize(env.step(actions));
  }
}
BENCHMARK(BM_EnvStep)->Arg(1)->Arg(4)->Arg(8);

}  // namespace

BENCHMARK_MAIN();
