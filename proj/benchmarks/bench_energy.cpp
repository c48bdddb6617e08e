#include <benchmark/benchmark.h>

#include "hug/energy.hpp"
#include "hug/gnc.hpp"
#include "hug/losses.hpp"
#include "hug/optim.hpp"

namespace {

hug::PointConfig make_points(int n, int d) {
  return hug::sample_gaussian_sphere(n, d, 0x5eed);
}

void BM_RieszEnergy(benchmark::State& state) {
  const auto points = make_points(static_cast<int>(state.range(0)), 3);
  for (auto _ : state) {
    benchmark::DoNotOptimize(hug::riesz_energy(points, 2.0));
  }
}
BENCHMARK(BM_RieszEnergy)->Arg(64)->Arg(256)->Arg(1024);

void BM_RieszEnergyParallel(benchmark::State& state) {
  const auto points = make_points(static_cast<int>(state.range(0)), 3);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        hug::riesz_energy(points, 2.0, hug::Reduce::Parallel));
  }
}
BENCHMARK(BM_RieszEnergyParallel)->Arg(256)->Arg(1024);

void BM_RieszGrad(benchmark::State& state) {
  const auto points = make_points(static_cast<int>(state.range(0)), 3);
  for (auto _ : state) {
    benchmark::DoNotOptimize(hug::riesz_energy_grad(points, 1.0));
  }
}
BENCHMARK(BM_RieszGrad)->Arg(64)->Arg(256);

void BM_LogDetGram(benchmark::State& state) {
  const auto points = make_points(static_cast<int>(state.range(0)), 8);
  for (auto _ : state) {
    benchmark::DoNotOptimize(hug::log_det_gram(points, 1.0));
  }
}
BENCHMARK(BM_LogDetGram)->Arg(32)->Arg(128);

hug::LabeledState make_state(int C, int per_class, int d) {
  std::vector<int> y;
  for (int c = 0; c < C; ++c) y.insert(y.end(), per_class, c);
  return hug::LabeledState(hug::sample_gaussian_sphere(C * per_class, d, 11),
                           hug::Labels(std::move(y), C),
                           hug::sample_gaussian_sphere(C, d, 13));
}

void BM_MheHugRelaxed(benchmark::State& state) {
  const auto labeled = make_state(static_cast<int>(state.range(0)), 16, 16);
  const hug::LossSpec spec;
  for (auto _ : state) {
    benchmark::DoNotOptimize(hug::mhe_hug_relaxed(labeled, spec));
  }
}
BENCHMARK(BM_MheHugRelaxed)->Arg(10)->Arg(50);

void BM_CeLoss(benchmark::State& state) {
  const auto labeled = make_state(static_cast<int>(state.range(0)), 16, 16);
  hug::LossSpec spec;
  spec.variant = hug::LossVariant::Ce;
  for (auto _ : state) {
    benchmark::DoNotOptimize(hug::ce_loss(labeled, spec));
  }
}
BENCHMARK(BM_CeLoss)->Arg(10)->Arg(50);

void BM_GncReport(benchmark::State& state) {
  const auto labeled = make_state(static_cast<int>(state.range(0)), 16, 16);
  const auto features = labeled.features_config();
  const auto proxies = labeled.proxies_config();
  for (auto _ : state) {
    benchmark::DoNotOptimize(hug::gnc_report(features, labeled.labels, proxies));
  }
}
BENCHMARK(BM_GncReport)->Arg(10)->Arg(50);

}  // namespace

BENCHMARK_MAIN();
