#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "ckdyn/bohm.hpp"
#include "ckdyn/closed_form.hpp"
#include "ckdyn/errors.hpp"
#include "ckdyn/format.hpp"

using namespace ckdyn;

namespace {

constexpr double kW0 = 2.0 * kPi / 10.0;

PhysicalSetup make_setup(double gamma, PotentialSpec pot = FreePotential{}) {
  PhysicalSetup s;
  s.gamma = gamma;
  s.potential = pot;
  return s;
}

GridConfig grid(double lo, double hi, std::size_t n, double dt) {
  GridConfig c;
  c.x_min = lo;
  c.x_max = hi;
  c.n_points = n;
  c.dt = dt;
  return c;
}

TrajectoryConfig traj(double dt, double t_end) {
  TrajectoryConfig c;
  c.dt = dt;
  c.t_end = t_end;
  return c;
}

}  // namespace

TEST_SUITE("bohm") {
  TEST_CASE("quantile launches") {
    const auto one = quantile_positions(1, 3.0, 2.0);
    REQUIRE(one.size() == 1);
    CHECK(one[0] == doctest::Approx(3.0));
    const auto q = quantile_positions(15, 0.0, 1.0);
    REQUIRE(q.size() == 15);
    for (std::size_t i = 0; i < 15; ++i) CHECK(q[i] == doctest::Approx(-q[14 - i]).epsilon(1e-12));
    CHECK(q.back() == doctest::Approx(1.83391).epsilon(1e-5));
    CHECK(std::is_sorted(q.begin(), q.end()));
  }

  TEST_CASE("random launches") {
    const auto a = random_positions(10000, 2.0, 0.5, 42);
    const auto b = random_positions(10000, 2.0, 0.5, 42);
    const auto c = random_positions(10000, 2.0, 0.5, 43);
    CHECK(a == b);
    CHECK(a != c);
    CHECK(std::is_sorted(a.begin(), a.end()));
    const double mean = std::accumulate(a.begin(), a.end(), 0.0) / a.size();
    CHECK(std::abs(mean - 2.0) < 4.0 * 0.5 / 100.0);
  }

  TEST_CASE("density sampling inverts the CDF") {
    std::vector<double> xs, rho;
    for (int j = 0; j <= 20000; ++j) {
      const double x = -10.0 + j * 1e-3;
      xs.push_back(x);
      rho.push_back(std::exp(-0.5 * (x - 1.0) * (x - 1.0) / 0.64));
    }
    const auto got = sample_from_density(xs, rho, 15, SamplingMode::Quantile);
    const auto want = quantile_positions(15, 1.0, 0.8);
    for (std::size_t i = 0; i < 15; ++i) CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-5));
    const auto r = sample_from_density(xs, rho, 1000, SamplingMode::Random, 7);
    CHECK(r == sample_from_density(xs, rho, 1000, SamplingMode::Random, 7));
    CHECK_THROWS_AS(sample_from_density(xs, std::vector<double>(xs.size(), 0.0), 3, SamplingMode::Quantile), DomainError);
  }

  TEST_CASE("Gaussian velocity field") {
    const auto setup = make_setup(0.5);
    const auto s = free_params(3.0, 0.0, 2.5, 1.0, setup);
    CHECK(velocity_gaussian(s, s.X, setup) == doctest::Approx(2.5 * std::exp(-1.5)));
    const auto s0 = free_params(0.0, 0.0, 2.5, 1.0, setup);
    CHECK(velocity_gaussian(s0, -3.0, setup) == velocity_gaussian(s0, 4.0, setup));
    const auto late = free_params(60.0, 0.0, 2.5, 1.0, setup);
    for (double x : {2.0, 5.0, 9.0}) CHECK(std::abs(velocity_gaussian(late, x, setup)) < 1e-12);
    CHECK(late.alpha.real() == doctest::Approx(0.125).epsilon(1e-10));
    CHECK(late.alpha.imag() == doctest::Approx(0.125).epsilon(1e-10));
  }

  TEST_CASE("superposition velocity") {
    const auto setup = make_setup(0.1);
    for (double t : {0.0, 3.0, 20.0}) {
      const auto a = free_params(t, 5.0, 0.0, 1.0, setup);
      const auto b = free_params(t, -5.0, 0.0, 1.0, setup);
      CHECK(std::abs(velocity_superposition(a, b, 0.0, setup)) < 1e-14);
      CHECK(velocity_superposition(a, b, 1.3, setup) == doctest::Approx(-velocity_superposition(a, b, -1.3, setup)));
    }
    const auto a = free_params(4.0, 0.0, 1.0, 1.0, setup);
    const auto far = free_params(4.0, 1000.0, 0.0, 1.0, setup);
    for (double x : {-2.0, 4.0, 7.0})
      CHECK(velocity_superposition(a, far, x, setup) == doctest::Approx(velocity_gaussian(a, x, setup)).epsilon(1e-12));
  }

  TEST_CASE("superposition nodes are flagged") {
    const auto setup = make_setup(0.0);
    // Two plane-wave-like packets with opposite momenta produce exact nodes at the centre.
    auto a = initial_packet(0.0, 2.0, 3.0, setup);
    auto b = initial_packet(0.0, -2.0, 3.0, setup);
    b.f += Complex(kPi, 0.0);  // relative sign -1: psi(0) = 0
    CHECK(std::isnan(velocity_superposition(a, b, 0.0, setup)));
    CHECK(density_superposition(a, b, 0.0, 1.0) < 1e-20);
  }

  TEST_CASE("grid velocity") {
    const auto setup = make_setup(0.2);
    const auto cfg = grid(-20.0, 20.0, 2048, 1e-3);
    const auto real = init_grid(cfg, [](double x) { return Complex(std::exp(-x * x / 4.0), 0.0); });
    const auto rv = grid_velocity(real, setup);
    for (std::size_t j = 0; j < rv.size(); ++j)
      if (std::abs(real.x(j)) < 4.0) CHECK(std::abs(rv[j]) < 1e-12);

    const auto p = free_params(2.0, 1.0, 1.5, 1.0, setup);
    auto g = init_grid(cfg, [&](double x) { return p.amplitude(x, 1.0); });
    g.t = 2.0;
    const auto v = grid_velocity(g, setup);
    const double sigma = p.dispersion(1.0);
    double worst = 0.0;
    for (double x = p.X - 4.0 * sigma; x <= p.X + 4.0 * sigma; x += 0.0137)
      worst = std::max(worst, std::abs(interpolate_cubic(g.x_min, g.dx(), v, x) - velocity_gaussian(p, x, setup)));
    CHECK(worst < 1e-6);

    auto wave = init_grid(grid(-100.0, 100.0, 4096, 1e-3),
                          [](double x) { return std::exp(Complex(-x * x / 200.0, 0.7 * x)); });
    wave.t = 3.0;
    const auto wv = grid_velocity(wave, setup);
    CHECK(wv[2048] == doctest::Approx(0.7 * std::exp(-0.6)).epsilon(1e-10));
  }

  TEST_CASE("cubic interpolation reproduces cubics") {
    std::vector<double> y;
    for (int j = 0; j < 20; ++j) {
      const double x = -1.0 + 0.1 * j;
      y.push_back(x * x * x - 2.0 * x + 0.5);
    }
    for (double x : {-0.97, -0.5, 0.03, 0.85}) CHECK(interpolate_cubic(-1.0, 0.1, y, x) == doctest::Approx(x * x * x - 2.0 * x + 0.5).epsilon(1e-12));
  }

  TEST_CASE("free trajectories freeze") {
    const auto setup = make_setup(0.5);
    const auto field = gaussian_field([&](double t) { return free_params(t, 0.0, 2.5, 1.0, setup); }, setup);
    const double launch[] = {0.0, 1.0};
    const auto ens = integrate_trajectories(launch, field, traj(1e-2, 40.0));
    CHECK(ens.times.back() == doctest::Approx(40.0));
    for (std::size_t k = 0; k < ens.times.size(); ++k)
      CHECK(std::abs(ens.positions[k][0] - free_solution(ens.times[k], 0.0, 2.5, 1.0, setup).x_t) < 1e-10);
    CHECK(ens.positions.back()[1] == doctest::Approx(5.0 + std::sqrt(2.0)).epsilon(1e-8));
    CHECK(ens.launch == std::vector<double>{0.0, 1.0});
    for (std::size_t k = 0; k + 100 < ens.times.size(); ++k)
      if (ens.times[k] >= 20.0)
        for (int i = 0; i < 2; ++i) CHECK(std::abs(ens.positions[k + 100][i] - ens.positions[k][i]) < 1e-3);
  }

  TEST_CASE("integrated and closed trajectories agree") {
    struct Case {
      PhysicalSetup setup;
      AnalyticScenario scenario;
      ParamsFunction params;
    };
    const auto free = make_setup(0.1);
    const auto lin = make_setup(0.5, LinearPotential{0.25});
    std::vector<Case> cases;
    cases.push_back({free, {TrajectoryLaw::Gaussian, 0.0, 2.5, 1.0}, [=](double t) { return free_params(t, 0.0, 2.5, 1.0, free); }});
    cases.push_back({lin, {TrajectoryLaw::Gaussian, 50.0, 0.0, 1.0}, [=](double t) { return linear_params(t, 50.0, 0.0, 1.0, lin); }});
    for (double r : {0.3, 2.0, 4.0}) {
      const auto h = make_setup(r * kW0, HarmonicPotential{kW0});
      const auto shape = stationary_alpha(classify_regime(h), h);
      cases.push_back({h, {TrajectoryLaw::StationaryShape, 5.0, 0.0, 1.0}, [=](double t) {
                         const auto c = harmonic_centroid(t, 5.0, 0.0, classify_regime(h), h);
                         GaussianParams s;
                         s.t = t;
                         s.X = c.x;
                         s.P = c.p * std::exp(h.gamma * t);
                         s.alpha = shape.alpha(t);
                         return s;
                       }});
    }
    for (const auto& c : cases) {
      const auto launch = quantile_positions(15, c.scenario.x0, c.scenario.sigma0);
      const auto ens = integrate_trajectories(launch, gaussian_field(c.params, c.setup), traj(1e-2, 20.0));
      for (std::size_t k = 0; k < ens.times.size(); k += 50) {
        for (std::size_t i = 0; i < launch.size(); ++i) {
          const double exact = analytic_trajectory(c.scenario, c.setup, launch[i], ens.times[k]);
          CHECK(std::abs(ens.positions[k][i] - exact) < 1e-8 * std::max(1.0, std::abs(exact)));
          if (i > 0) CHECK(ens.positions[k][i] > ens.positions[k][i - 1]);
        }
      }
    }
  }

  TEST_CASE("closed trajectory laws") {
    const auto h = make_setup(0.2, HarmonicPotential{1.0});
    CHECK(analytic_trajectory({TrajectoryLaw::QuasiEigenstate}, h, 1.0, 10.0) == doctest::Approx(std::exp(-1.0)));
    CHECK(std::exp(-1.0) == doctest::Approx(0.36788).epsilon(1e-5));
    const auto u = make_setup(0.3 * kW0, HarmonicPotential{kW0});
    for (double t : {0.0, 3.0, 11.0})
      CHECK(analytic_trajectory({TrajectoryLaw::StationaryShape, 5.0}, u, 5.0, t) ==
            harmonic_centroid(t, 5.0, 0.0, classify_regime(u), u).x);
    const auto o = make_setup(4.0 * kW0, HarmonicPotential{kW0});
    CHECK(coalescence_rate(o) == doctest::Approx((4.0 - 2.0 * std::sqrt(3.0)) * kW0 / 2.0).epsilon(1e-14));
    CHECK(coalescence_rate(o) / kW0 == doctest::Approx(0.26795).epsilon(1e-4));
    CHECK(coalescence_rate(u) == doctest::Approx(0.15 * kW0));
    CHECK_THROWS_AS(analytic_trajectory({TrajectoryLaw::QuasiEigenstate}, o, 1.0, 1.0), DomainError);
    CHECK_THROWS_AS(analytic_trajectory({TrajectoryLaw::Gaussian}, u, 1.0, 1.0), DomainError);
  }

  TEST_CASE("coalescence ratio and strict separation") {
    for (double r : {0.3, 2.0, 4.0}) {
      const auto h = make_setup(r * kW0, HarmonicPotential{kW0});
      const AnalyticScenario sc{TrajectoryLaw::StationaryShape, 5.0, 0.0, 1.0};
      for (double t : {1.0, 10.0, 40.0}) {
        const double xc = harmonic_centroid(t, 5.0, 0.0, classify_regime(h), h).x;
        const double sep = analytic_trajectory(sc, h, 5.5, t) - xc;
        CHECK(sep > 0.0);
        CHECK(sep / 0.5 == doctest::Approx(std::exp(-coalescence_rate(h) * t)).epsilon(1e-8));
      }
    }
  }

  TEST_CASE("undefined velocities keep the last finite value") {
    int calls = 0;
    const VelocityField field = [&](double t, std::span<const double> x, std::span<double> v) {
      ++calls;
      for (std::size_t i = 0; i < x.size(); ++i) v[i] = (i == 1 && t > 0.5) ? std::numeric_limits<double>::quiet_NaN() : 1.0;
    };
    const double launch[] = {0.0, 0.0};
    const auto ens = integrate_trajectories(launch, field, traj(0.1, 1.0));
    CHECK(ens.node_flag[0] == 0);
    CHECK(ens.node_flag[1] == 1);
    CHECK(ens.flagged() == 1);
    CHECK(ens.positions.back()[1] == doctest::Approx(1.0));
    CHECK(calls == 40);
  }

  TEST_CASE("leaving the domain truncates") {
    const VelocityField field = [](double, std::span<const double> x, std::span<double> v) {
      for (std::size_t i = 0; i < x.size(); ++i) v[i] = 1.0;
    };
    auto cfg = traj(0.1, 10.0);
    cfg.bounds = std::pair{-1.0, 2.0};
    const double launch[] = {0.0, 1.45};
    try {
      integrate_trajectories(launch, field, cfg);
      FAIL("expected truncation");
    } catch (const TruncationError& e) {
      CHECK(e.trajectory() == 1);
      CHECK(e.exit_time() == doctest::Approx(0.6));
    }
  }

  TEST_CASE("quasi-eigenstate field") {
    const auto h = make_setup(0.3 * kW0, HarmonicPotential{kW0});
    const double launch[] = {-1.0, 0.5, 2.0};
    const auto ens = integrate_trajectories(launch, quasi_eigenstate_field(h), traj(1e-2, 20.0));
    for (std::size_t i = 0; i < 3; ++i)
      CHECK(ens.positions.back()[i] == doctest::Approx(launch[i] * std::exp(-0.5 * h.gamma * 20.0)).epsilon(1e-9));
  }

  TEST_CASE("grid-driven trajectories") {
    const auto setup = make_setup(0.1);
    const auto cfg = grid(-40.0, 60.0, 4096, 5e-3);
    const auto p0 = free_params(0.0, 0.0, 2.5, 1.0, setup);
    GridPropagator prop(init_grid(cfg, [&](double x) { return p0.amplitude(x, 1.0); }), setup, cfg);
    const auto launch = quantile_positions(5, 0.0, 1.0);
    const auto ens = integrate_trajectories(launch, grid_field(prop), traj(1e-2, 5.0));
    const AnalyticScenario sc{TrajectoryLaw::Gaussian, 0.0, 2.5, 1.0};
    for (std::size_t i = 0; i < launch.size(); ++i)
      CHECK(std::abs(ens.positions.back()[i] - analytic_trajectory(sc, setup, launch[i], 5.0)) < 1e-3);
  }

  TEST_CASE("trajectory file") {
    TrajectoryEnsemble e;
    e.launch = {0.0, 1.0};
    e.times = {0.0, 0.5};
    e.positions = {{0.0, 1.0}, {0.25, 1.5}};
    e.node_flag = {0, 0};
    std::stringstream ss;
    const double centroid[] = {0.5, 0.875};
    write_trajectories(ss, e, {"demo"}, centroid);
    const auto t = read_table(ss);
    CHECK(t.columns == std::vector<std::string>{"t", "x_traj_0", "x_traj_1", "x_centroid"});
    CHECK(t.rows[1][3] == 0.875);
  }
}
