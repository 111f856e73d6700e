#include <benchmark/benchmark.h>

#include "spikelab/config.hpp"
#include "spikelab/grid.hpp"
#include "spikelab/limit_problem.hpp"
#include "spikelab/pipeline.hpp"

namespace {

using namespace spikelab;

const RunConfig& cfg() {
  static RunConfig c = RunConfig::defaults();
  return c;
}

const GroundState& townes() {
  static GroundState gs = solve_ground_state(1.0, cfg().nonlinearity, 2);
  return gs;
}

EpsProblem make_problem(int n) {
  RunConfig c = cfg();
  c.grid.n = n;
  auto cpc = classify_critical_point(c.potential);
  return EpsProblem(0.1, c.nonlinearity, c.resolved_truncation(), c.potential,
                    cpc, c.grid);
}

void BM_ground_state_shoot(benchmark::State& state) {
  for (auto _ : state) {
    GroundState gs = solve_ground_state(1.0, cfg().nonlinearity, 2);
    benchmark::DoNotOptimize(gs.energy);
  }
}
BENCHMARK(BM_ground_state_shoot)->Unit(benchmark::kMillisecond);

void BM_energy_eval(benchmark::State& state) {
  EpsProblem p = make_problem(static_cast<int>(state.range(0)));
  GridField u = interpolate_radial(townes().profile, p.n(), p.L(), {0.0, 0.0});
  for (auto _ : state) benchmark::DoNotOptimize(energy(p, u));
}
BENCHMARK(BM_energy_eval)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_gradient_eval(benchmark::State& state) {
  EpsProblem p = make_problem(static_cast<int>(state.range(0)));
  GridField u = interpolate_radial(townes().profile, p.n(), p.L(), {0.0, 0.0});
  for (auto _ : state) {
    GridField g = gradient(p, u);
    benchmark::DoNotOptimize(g.v.data());
  }
}
BENCHMARK(BM_gradient_eval)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_interpolate_radial(benchmark::State& state) {
  EpsProblem p = make_problem(256);
  for (auto _ : state) {
    GridField u = interpolate_radial(townes().profile, p.n(), p.L(), {1.0, -2.0});
    benchmark::DoNotOptimize(u.v.data());
  }
}
BENCHMARK(BM_interpolate_radial)->Unit(benchmark::kMillisecond);

void BM_newton_autonomous(benchmark::State& state) {
  RunConfig c = cfg();
  c.grid.n = static_cast<int>(state.range(0));
  auto cpc = classify_critical_point(c.potential);
  EpsProblem p = EpsProblem::autonomous(1.0, 0.1, c.nonlinearity,
                                        c.resolved_truncation(), cpc, c.grid);
  GridField seed = interpolate_radial(townes().profile, p.n(), p.L(), {0.0, 0.0});
  for (auto _ : state) {
    GridField u = newton_solve(p, seed, 1e-10, 50);
    benchmark::DoNotOptimize(u.v.data());
  }
}
BENCHMARK(BM_newton_autonomous)->Arg(128)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
