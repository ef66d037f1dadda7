#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

#include "ckdyn/bohm.hpp"
#include "ckdyn/closed_form.hpp"
#include "ckdyn/gaussian_ode.hpp"
#include "ckdyn/grid_solver.hpp"

namespace {

using namespace ckdyn;

PhysicalSetup harmonic_setup() {
  PhysicalSetup s;
  s.gamma = 0.3 * 2.0 * kPi / 10.0;
  s.potential = HarmonicPotential{2.0 * kPi / 10.0};
  return s;
}

void BM_SplitStep(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  GridConfig cfg;
  cfg.n_points = n;
  cfg.x_min = -40.0;
  cfg.x_max = 40.0;
  const PhysicalSetup setup = harmonic_setup();
  const GaussianParams p0 = initial_packet(5.0, 0.0, 1.0, setup);
  GridWavefunction w = init_grid(cfg, [&](double x) { return p0.amplitude(x, setup.hbar); });
  SplitStepper stepper(setup, n, cfg.x_min, cfg.x_max);
  for (auto _ : state) {
    stepper.step(w, 1e-3);
    benchmark::DoNotOptimize(w.psi.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(n));
}
BENCHMARK(BM_SplitStep)->RangeMultiplier(4)->Range(1024, 16384);

void BM_Rk4Step(benchmark::State& state) {
  const PhysicalSetup setup = harmonic_setup();
  GaussianParams s = initial_packet(5.0, 0.0, 1.0, setup);
  for (auto _ : state) {
    s = rk4_step(s, setup, 1e-3);
    benchmark::DoNotOptimize(s);
  }
}
BENCHMARK(BM_Rk4Step);

void BM_VelocitySuperposition(benchmark::State& state) {
  PhysicalSetup setup;
  setup.gamma = 0.1;
  const GaussianParams a = free_params(10.0, 5.0, 0.0, 1.0, setup);
  const GaussianParams b = free_params(10.0, -5.0, 0.0, 1.0, setup);
  double x = -20.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(velocity_superposition(a, b, x, setup));
    x = x > 20.0 ? -20.0 : x + 0.01;
  }
}
BENCHMARK(BM_VelocitySuperposition);

void BM_EnsembleClosedFree(benchmark::State& state) {
  PhysicalSetup setup;
  setup.gamma = 0.1;
  const auto launch = quantile_positions(static_cast<std::size_t>(state.range(0)), 0.0, 1.0);
  const VelocityField field = gaussian_field([&](double t) { return free_params(t, 0.0, 2.5, 1.0, setup); }, setup);
  TrajectoryConfig cfg;
  cfg.dt = 1e-2;
  cfg.t_end = 10.0;
  cfg.record_stride = 50;
  for (auto _ : state) benchmark::DoNotOptimize(integrate_trajectories(launch, field, cfg));
  state.SetItemsProcessed(state.iterations() * state.range(0) * 1000);
}
BENCHMARK(BM_EnsembleClosedFree)->Arg(15)->Arg(1000);

}  // namespace

BENCHMARK_MAIN();
