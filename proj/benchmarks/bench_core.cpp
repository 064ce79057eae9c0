#include <benchmark/benchmark.h>

#include <vector>

#include "lunarmap/corrector.hpp"
#include "lunarmap/search.hpp"

using namespace lunarmap;

namespace {

const TransferProblem& problem() {
  static const TransferProblem p(SystemConstants{}, 167.0, 100.0);
  return p;
}

void BM_VectorField(benchmark::State& state) {
  const PlanarState s{0.4, -0.3, 0.2, 0.5};
  for (auto _ : state) benchmark::DoNotOptimize(problem().model().vector_field(s));
}
BENCHMARK(BM_VectorField);

void BM_PropagateArc(benchmark::State& state) {
  const PlanarState s0 = departure_state({0.5, 1.405, 0.0}, problem().orbit());
  const double tof = static_cast<double>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(problem().model().propagate(s0, tof, problem().arc_options()));
  }
}
BENCHMARK(BM_PropagateArc)->Arg(1)->Arg(5)->Arg(20)->Unit(benchmark::kMicrosecond);

void BM_PropagateWithStm(benchmark::State& state) {
  const PlanarState s0 = departure_state({0.5, 1.405, 0.0}, problem().orbit());
  for (auto _ : state) {
    benchmark::DoNotOptimize(problem().model().propagate_with_stm(s0, 5.0, problem().arc_options()));
  }
}
BENCHMARK(BM_PropagateWithStm)->Unit(benchmark::kMicrosecond);

void BM_Residual(benchmark::State& state) {
  const ConstructionParams p{0.5, 1.405, 5.0};
  for (auto _ : state) benchmark::DoNotOptimize(residual(problem(), p));
}
BENCHMARK(BM_Residual)->Unit(benchmark::kMicrosecond);

// One desk-grid ray: 250 TOF samples from a single propagation.
void BM_EvaluateRay(benchmark::State& state) {
  std::vector<double> tofs;
  for (int k = 0; k < 250; ++k) tofs.push_back(kPi / 50.0 + k * kPi / 25.0);
  for (auto _ : state) benchmark::DoNotOptimize(evaluate_ray(problem(), 0.5, 1.405, tofs));
}
BENCHMARK(BM_EvaluateRay)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
