#include <doctest.h>

#include <cmath>

#include "ckdyn/bohm.hpp"
#include "ckdyn/closed_form.hpp"
#include "ckdyn/errors.hpp"
#include "ckdyn/gaussian_ode.hpp"

using namespace ckdyn;

namespace {

PhysicalSetup make_setup(double gamma, PotentialSpec pot = FreePotential{}) {
  PhysicalSetup s;
  s.gamma = gamma;
  s.potential = pot;
  return s;
}

constexpr double kW0 = 2.0 * kPi / 10.0;

GaussianParams run(const GaussianParams& s0, const PhysicalSetup& setup, double dt, double t_end) {
  OdeConfig cfg;
  cfg.dt = dt;
  cfg.t_end = t_end;
  cfg.record_stride = static_cast<int>(std::llround(t_end / dt));
  return propagate(s0, setup, cfg).back();
}

}  // namespace

TEST_SUITE("gaussian_ode") {
  TEST_CASE("derivatives of the free packet") {
    GaussianParams s;
    s.P = 2.5;
    s.alpha = Complex(0.0, 0.25);
    for (double g : {0.0, 0.1, 0.5}) {
      const auto d = ansatz_derivatives(s, make_setup(g));
      CHECK(d.dX == doctest::Approx(2.5));
      CHECK(d.dP == 0.0);
      CHECK(d.dalpha.real() == doctest::Approx(0.125));
      CHECK(d.dalpha.imag() == doctest::Approx(0.0));
    }
  }

  TEST_CASE("coherent shape is a fixed point without friction") {
    GaussianParams s;
    s.X = 1.0;
    s.alpha = Complex(0.0, kW0 / 2.0);
    const auto setup = make_setup(0.0, HarmonicPotential{kW0});
    CHECK(std::abs(ansatz_derivatives(s, setup).dalpha) < 1e-16);
    const auto next = rk4_step(s, setup, 1e-2);
    CHECK(next.alpha.real() == doctest::Approx(0.0));
    CHECK(next.alpha.imag() == doctest::Approx(kW0 / 2.0).epsilon(1e-15));
  }

  TEST_CASE("linear force") {
    GaussianParams s;
    s.alpha = Complex(0.0, 0.25);
    for (double x : {-3.0, 0.0, 50.0}) {
      s.X = x;
      CHECK(ansatz_derivatives(s, make_setup(0.0, LinearPotential{0.25})).dP == doctest::Approx(0.25));
    }
  }

  TEST_CASE("one step against the free closed form") {
    const auto setup = make_setup(0.5);
    const auto s0 = initial_packet(0.0, 2.5, 1.0, setup);
    const auto s1 = rk4_step(s0, setup, 1e-3);
    // x_t = x0 + p0 (1 - e^{-gamma t}) / (m gamma)
    const double oracle = 2.5 * (1.0 - std::exp(-0.5e-3)) / 0.5;
    CHECK(std::abs(s1.X - oracle) < 1e-12);
    CHECK(s1.t == 1e-3);
  }

  TEST_CASE("initial packet") {
    const auto setup = make_setup(0.0);
    const auto s = initial_packet(0.0, 2.5, 1.0, setup);
    CHECK(s.alpha.real() == 0.0);
    CHECK(s.alpha.imag() == doctest::Approx(0.25));
    CHECK(s.dispersion(1.0) == doctest::Approx(1.0).epsilon(1e-15));
    const double sigma = std::sqrt(1.0 / (2.0 * 0.62832));
    CHECK(sigma == doctest::Approx(0.89206).epsilon(1e-5));
    CHECK(initial_packet(3.0, 0.0, sigma, setup).dispersion(1.0) == doctest::Approx(sigma).epsilon(1e-15));
    CHECK_THROWS_AS(initial_packet(0.0, 0.0, 0.0, setup), DomainError);
    CHECK_THROWS_AS(initial_packet(0.0, 0.0, -1.0, setup), DomainError);
  }

  TEST_CASE("initial packet is normalized") {
    const auto setup = make_setup(0.0);
    const auto s = initial_packet(1.0, 0.7, 0.8, setup);
    double sum = 0.0;
    const double h = 1e-3;
    for (double x = -10.0; x <= 12.0; x += h) sum += std::norm(s.amplitude(x, 1.0));
    CHECK(sum * h == doctest::Approx(1.0).epsilon(1e-10));
  }

  TEST_CASE("propagation matches closed forms") {
    {
      const auto setup = make_setup(0.1);
      const auto end = run(initial_packet(0.0, 2.5, 1.0, setup), setup, 1e-3, 40.0);
      CHECK(end.t == doctest::Approx(40.0).epsilon(1e-15));
      CHECK(std::abs(end.X - free_solution(40.0, 0.0, 2.5, 1.0, setup).x_t) < 1e-8);
    }
    {
      const auto setup = make_setup(0.5, LinearPotential{0.25});
      const auto end = run(initial_packet(50.0, 0.0, 1.0, setup), setup, 1e-3, 40.0);
      const auto c = linear_solution(40.0, 50.0, 0.0, setup);
      CHECK(std::abs(end.physical_momentum(0.5) - c.p) < 1e-8);
      CHECK(std::abs(end.X - c.x) < 1e-8 * std::abs(c.x));
    }
    {
      const auto setup = make_setup(0.3 * kW0, HarmonicPotential{kW0});
      const double sigma = std::sqrt(1.0 / (2.0 * kW0));
      const auto end = run(initial_packet(5.0, 0.0, sigma, setup), setup, 1e-3, 40.0);
      const auto c = harmonic_centroid(40.0, 5.0, 0.0, classify_regime(setup), setup);
      CHECK(std::abs(end.X - c.x) < 1e-8);
      CHECK(std::abs(end.physical_momentum(setup.gamma) - c.p) < 1e-8);
    }
  }

  TEST_CASE("frictionless free width") {
    const auto setup = make_setup(0.0);
    OdeConfig cfg;
    cfg.dt = 1e-3;
    cfg.t_end = 20.0;
    cfg.record_stride = 500;
    for (const auto& s : propagate(initial_packet(0.0, 2.5, 1.0, setup), setup, cfg)) {
      const double width = std::sqrt(1.0 + s.t * s.t / 4.0);
      CHECK(std::abs(s.dispersion(1.0) - width) < 1e-8 * width);
      CHECK(std::abs(s.X - 2.5 * s.t) < 1e-8 * std::max(1.0, 2.5 * s.t));
    }
  }

  TEST_CASE("fourth-order convergence") {
    const double w0 = kW0;
    const double sigma = std::sqrt(1.0 / (2.0 * w0));
    struct Case {
      PhysicalSetup setup;
      GaussianParams s0;
    };
    const Case cases[] = {
        {make_setup(0.5), initial_packet(0.0, 2.5, 1.0, make_setup(0.5))},
        {make_setup(0.5, LinearPotential{0.25}), initial_packet(50.0, 0.0, 1.0, make_setup(0.5))},
        {make_setup(0.3 * w0, HarmonicPotential{w0}), initial_packet(5.0, 0.0, sigma, make_setup(0.3 * w0))},
        {make_setup(2.0 * w0, HarmonicPotential{w0}), initial_packet(5.0, 0.0, sigma, make_setup(2.0 * w0))},
        {make_setup(4.0 * w0, HarmonicPotential{w0}), initial_packet(5.0, 0.0, sigma, make_setup(4.0 * w0))},
    };
    for (const auto& c : cases) {
      // Richardson: errors against a much finer reference.
      const auto ref = run(c.s0, c.setup, 1e-3, 4.0);
      const auto coarse = run(c.s0, c.setup, 0.2, 4.0);
      const auto fine = run(c.s0, c.setup, 0.1, 4.0);
      const double e1 = std::abs(coarse.alpha - ref.alpha);
      const double e2 = std::abs(fine.alpha - ref.alpha);
      const double order = std::log2(e1 / e2);
      CHECK(order > 3.8);
      CHECK(order < 4.2);
    }
  }

  TEST_CASE("phase constant does not affect velocities") {
    const auto setup = make_setup(0.5);
    auto s = run(initial_packet(0.0, 2.5, 1.0, setup), setup, 1e-3, 3.0);
    auto zeroed = s;
    zeroed.f = 0.0;
    for (double x : {-2.0, 0.5, 7.0}) CHECK(velocity_gaussian(s, x, setup) == velocity_gaussian(zeroed, x, setup));
    CHECK(s.action != 0.0);
  }

  TEST_CASE("action accumulator equals the classical free action") {
    const auto setup = make_setup(0.5);
    const auto s = run(initial_packet(0.0, 2.5, 1.0, setup), setup, 1e-3, 10.0);
    // L = (P^2 / 2m) e^{-gamma t} with constant P: S = P^2 tau / 2m.
    CHECK(s.action == doctest::Approx(2.5 * 2.5 * contracted_time(0.5, 10.0) / 2.0).epsilon(1e-10));
  }

  TEST_CASE("non-normalizable and overflowing states are reported") {
    const auto setup = make_setup(0.0);
    GaussianParams s;
    s.alpha = Complex(0.0, -0.1);
    CHECK_THROWS_AS(rk4_step(s, setup, 1e-3), NonNormalizableError);

    const auto fast = make_setup(50.0);
    OdeConfig cfg;
    cfg.dt = 1e-2;
    cfg.t_end = 20.0;
    CHECK_THROWS_AS(propagate(initial_packet(0.0, 1.0, 1.0, fast), fast, cfg), OverflowError);
  }

  TEST_CASE("config validation") {
    OdeConfig cfg;
    cfg.dt = 0.0;
    CHECK_THROWS_AS(validate(cfg), ConfigError);
    cfg = OdeConfig{};
    cfg.record_stride = 0;
    CHECK_THROWS_AS(validate(cfg), ConfigError);
    cfg = OdeConfig{};
    cfg.dt = 2.0;
    cfg.t_end = 1.0;
    CHECK_THROWS_AS(validate(cfg), ConfigError);
  }

  TEST_CASE("record stride and times") {
    const auto setup = make_setup(0.1);
    OdeConfig cfg;
    cfg.dt = 0.01;
    cfg.t_end = 1.0;
    cfg.record_stride = 10;
    const auto states = propagate(initial_packet(0.0, 1.0, 1.0, setup), setup, cfg);
    REQUIRE(states.size() == 11);
    CHECK(states[5].t == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(states.back().t == doctest::Approx(1.0).epsilon(1e-15));
  }

  TEST_CASE("on-demand track") {
    const auto setup = make_setup(0.3 * kW0, HarmonicPotential{kW0});
    OdeTrack track(initial_packet(5.0, 0.0, 1.0, setup), setup, 1e-3);
    const auto direct = run(initial_packet(5.0, 0.0, 1.0, setup), setup, 1e-3, 2.5);
    const auto a = track.at(2.5);
    CHECK(std::abs(a.X - direct.X) < 1e-12);
    CHECK(track.at(3.0).t == doctest::Approx(3.0));
    CHECK(std::abs(track.at(2.5).X - direct.X) < 1e-12);
  }
}
