#include <benchmark/benchmark.h>

#include <random>

#include "critgyro/curves.hpp"
#include "critgyro/estimate.hpp"
#include "critgyro/spectrum.hpp"

using namespace critgyro;

namespace {

const Model& model6() {
  static const Model m(6);
  return m;
}

void BM_BuildModel(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(Model(static_cast<int>(state.range(0))));
}
BENCHMARK(BM_BuildModel)->Arg(4)->Arg(6)->Unit(benchmark::kMillisecond);

void BM_Assemble(benchmark::State& state) {
  const auto& m = model6();
  for (auto _ : state) benchmark::DoNotOptimize(m.assemble(0.5, 0.04, 0.8));
}
BENCHMARK(BM_Assemble)->Unit(benchmark::kMicrosecond);

void BM_SweepPoint(benchmark::State& state) {
  const auto& m = model6();
  const std::vector<double> om{0.8};
  SweepRequest req;
  req.follow_sector = state.range(0) != 0;
  for (auto _ : state) benchmark::DoNotOptimize(ground_state_sweep(m, 0.5, 0.04, om, req));
}
BENCHMARK(BM_SweepPoint)->Arg(1)->Arg(0)->Unit(benchmark::kMillisecond);

void BM_Lanczos(benchmark::State& state) {
  const auto h = model6().assemble(0.5, 0.04, 0.8);
  SolverOptions opt;
  opt.dense_threshold = 0;
  for (auto _ : state) benchmark::DoNotOptimize(lowest_k(h, 2, opt));
}
BENCHMARK(BM_Lanczos)->Unit(benchmark::kMillisecond);

void BM_Protocol(benchmark::State& state) {
  ResonanceCurve c;
  c.g = 0.5;
  c.anisotropy = 0.04;
  c.omega = linspace(0.6, 1.0, 601);
  for (double w : c.omega) c.p0.push_back(1.0 / (1.0 + std::exp((w - 0.8) / 0.02)));
  refresh_metadata(c);
  const CurveCatalog cat({}, {c});
  ProtocolConfig cfg;
  cfg.true_omega = 0.8;
  cfg.prior_lo = 0.77;
  cfg.prior_hi = 0.83;
  cfg.measurements = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(run_protocol(cfg, cat));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Protocol)->Arg(100)->Arg(10000)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
