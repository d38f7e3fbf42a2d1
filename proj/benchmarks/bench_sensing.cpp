#include <benchmark/benchmark.h>

#include "h2h/sensing.hpp"

namespace {

void BM_Lidar(benchmark::State& state) {
  const h2h::TrackModel track = h2h::make_oval(12.0, 5.0, 1.0);
  const h2h::CollisionBody opp{{2.0, -5.2}, 0.1, 0.5, 0.3};
  for (auto _ : state) {
    benchmark::DoNotOptimize(h2h::cast_lidar({0.0, -5.0}, 0.0, track, state.range(0) ? &opp : nullptr));
  }
}
BENCHMARK(BM_Lidar)->Arg(0)->Arg(1);

void BM_BodySeparation(benchmark::State& state) {
  const h2h::CollisionBody a{{0.0, 0.0}, 0.3, 0.5, 0.3};
  const h2h::CollisionBody b{{0.6, 0.2}, -0.4, 0.5, 0.3};
  for (auto _ : state) benchmark::DoNotOptimize(h2h::body_separation(a, b));
}
BENCHMARK(BM_BodySeparation);

}  // namespace
