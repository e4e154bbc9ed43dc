#include "streamgp/batch_sgp.hpp"
#include "streamgp/dataset.hpp"
#include "streamgp/exact_gp.hpp"
#include "streamgp/streaming_pep.hpp"
#include "streamgp/streaming_vfe.hpp"

#include <benchmark/benchmark.h>

namespace {

using namespace streamgp;

struct Setup {
  Hyperparams theta;
  DataBatch b1, b2;
  Matrix Z;
  SparsePosterior state;
};

Setup make_setup(Index n_batch, Index m) {
  Setup s;
  s.theta = Hyperparams::isotropic(1, 0.8, 1.0, 0.1);
  const auto [X, y] = synth_gp_stream(1, 2 * n_batch, s.theta, 11);
  s.b1 = {X.topRows(n_batch), y.head(n_batch)};
  s.b2 = {X.bottomRows(n_batch), y.tail(n_batch)};
  s.Z.resize(m, 1);
  for (Index i = 0; i < m; ++i) {
    s.Z(i, 0) = 10.0 * (static_cast<double>(i) + 0.5) / static_cast<double>(m);
  }
  s.state = vfe_update(SparsePosterior::initial(), s.b1, s.theta, s.Z).posterior;
  return s;
}

void BM_VfeUpdate(benchmark::State& state) {
  const auto s = make_setup(state.range(0), state.range(1));
  for (auto _ : state) {
    benchmark::DoNotOptimize(vfe_update(s.state, s.b2, s.theta, s.Z));
  }
}
BENCHMARK(BM_VfeUpdate)->Args({300, 50})->Args({300, 100})->Args({500, 100});

void BM_PepUpdate(benchmark::State& state) {
  const auto s = make_setup(state.range(0), state.range(1));
  const PepConfig cfg{0.5};
  for (auto _ : state) {
    benchmark::DoNotOptimize(pep_update(s.state, s.b2, s.theta, s.Z, cfg));
  }
}
BENCHMARK(BM_PepUpdate)->Args({300, 50})->Args({300, 100});

void BM_CollapsedBound(benchmark::State& state) {
  const auto s = make_setup(state.range(0), state.range(1));
  for (auto _ : state) {
    benchmark::DoNotOptimize(collapsed_bound(s.b1.X, s.b1.y, s.Z, s.theta));
  }
}
BENCHMARK(BM_CollapsedBound)->Args({300, 50})->Args({1000, 100});

void BM_ExactFit(benchmark::State& state) {
  const auto s = make_setup(state.range(0), 10);
  for (auto _ : state) {
    benchmark::DoNotOptimize(ExactGp::fit(s.b1.X, s.b1.y, s.theta));
  }
}
BENCHMARK(BM_ExactFit)->Arg(300)->Arg(1000);

}  // namespace

BENCHMARK_MAIN();
