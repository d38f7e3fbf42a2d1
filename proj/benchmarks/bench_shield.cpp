#include <benchmark/benchmark.h>

#include "h2h/cbf_shield.hpp"

namespace {

void BM_FilterControl(benchmark::State& state) {
  const h2h::TrackModel track = h2h::make_oval(12.0, 5.0, 1.0);
  const h2h::VehicleParams p = h2h::VehicleParams::reference();
  const h2h::VehicleState s{0.0, -4.5, 0.3, 4.0, 0.0, 0.0};
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        h2h::filter_control({0.5, 0.0}, s, track, {0.25, 0.25}, h2h::CbfConfig{}, p, p.tires()));
  }
}
BENCHMARK(BM_FilterControl);

}  // namespace
