#include <benchmark/benchmark.h>

#include "h2h/planner.hpp"
#include "h2h/raceline.hpp"

namespace {

void BM_Plan(benchmark::State& state) {
  const h2h::TrackModel track = h2h::make_oval(12.0, 5.0, 1.0);
  const h2h::Raceline rl = h2h::compute_raceline(track);
  h2h::PlannerConfig cfg;
  cfg.horizon = 4;
  cfg.budget = static_cast<int>(state.range(0));
  const h2h::GameNode root{{2, 1, 1, 0, 0.0}, h2h::DiscreteState{2, 0, 1, 0, 0.2}};
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(h2h::plan(root, track, rl.optimal_lanes, cfg, seed++));
}
BENCHMARK(BM_Plan)->Arg(150)->Arg(2000)->Unit(benchmark::kMillisecond);

void BM_Raceline(benchmark::State& state) {
  const h2h::TrackModel track = h2h::make_oval(12.0, 5.0, 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(h2h::compute_raceline(track));
}
BENCHMARK(BM_Raceline)->Unit(benchmark::kMillisecond);

}  // namespace
