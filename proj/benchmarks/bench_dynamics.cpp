#include <benchmark/benchmark.h>

#include "h2h/vehicle_dynamics.hpp"

namespace {

void BM_Step(benchmark::State& state) {
  const h2h::VehicleParams p = h2h::VehicleParams::reference();
  const h2h::TireSet tires = p.tires();
  h2h::VehicleState s{0, 0, 0, 2.0, 0.0, 0.0};
  for (auto _ : state) {
    s = h2h::step(s, {0.3, 0.1}, p, tires, 0.02);
    benchmark::DoNotOptimize(s);
  }
}
BENCHMARK(BM_Step);

void BM_Derivatives(benchmark::State& state) {
  const h2h::VehicleParams p = h2h::VehicleParams::reference();
  const h2h::TireSet tires = p.tires();
  const h2h::VehicleState s{0, 0, 0.3, 2.5, 0.2, 0.4};
  for (auto _ : state) benchmark::DoNotOptimize(h2h::derivatives(s, {0.5, -0.1}, p, tires));
}
BENCHMARK(BM_Derivatives);

}  // namespace
