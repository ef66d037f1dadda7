#include <doctest.h>

#include <cmath>
#include <sstream>

#include "ckdyn/core.hpp"
#include "ckdyn/errors.hpp"
#include "ckdyn/format.hpp"

using namespace ckdyn;

namespace {

PhysicalSetup harmonic(double omega0, double gamma) {
  PhysicalSetup s;
  s.gamma = gamma;
  s.potential = HarmonicPotential{omega0};
  return s;
}

}  // namespace

TEST_SUITE("core") {
  TEST_CASE("regime classification") {
    const double w0 = 0.62832;

    const auto under = classify_regime(harmonic(w0, 0.3 * w0));
    CHECK(under.kind == Regime::Underdamped);
    CHECK(under.rate == doctest::Approx(std::sqrt(w0 * w0 - 0.15 * w0 * 0.15 * w0)).epsilon(1e-14));
    CHECK(under.rate == doctest::Approx(0.62124).epsilon(1e-4));
    CHECK(under.phase == doctest::Approx(std::atan(0.15 * w0 / under.rate)).epsilon(1e-14));

    const auto crit = classify_regime(harmonic(w0, 2.0 * w0));
    CHECK(crit.kind == Regime::Critical);
    CHECK(crit.rate == 0.0);

    const auto over = classify_regime(harmonic(w0, 4.0 * w0));
    CHECK(over.kind == Regime::Overdamped);
    CHECK(over.rate == doctest::Approx(std::sqrt(3.0) * w0).epsilon(1e-14));
    CHECK(over.rate == doctest::Approx(1.08828).epsilon(1e-5));
  }

  TEST_CASE("regime depends only on gamma / omega0") {
    for (double ratio : {0.3, 1.999, 2.0, 2.001, 4.0}) {
      const auto base = classify_regime(harmonic(1.0, ratio));
      for (double c : {1e-3, 0.7, 13.0, 1e4}) {
        const auto scaled = classify_regime(harmonic(c, c * ratio));
        CHECK(scaled.kind == base.kind);
        CHECK(scaled.rate == doctest::Approx(c * base.rate).epsilon(1e-12));
      }
    }
  }

  TEST_CASE("critical band is relative") {
    const double w0 = 3.0;
    CHECK(classify_regime(harmonic(w0, 2.0 * w0 * (1.0 + 1e-13))).kind == Regime::Critical);
    CHECK(classify_regime(harmonic(w0, 2.0 * w0 * (1.0 + 1e-9))).kind == Regime::Overdamped);
    CHECK(classify_regime(harmonic(w0, 2.0 * w0 * (1.0 - 1e-9))).kind == Regime::Underdamped);
  }

  TEST_CASE("classification rejects non-harmonic potentials") {
    PhysicalSetup s;
    CHECK_THROWS_AS(classify_regime(s), DomainError);
  }

  TEST_CASE("potential values and derivatives") {
    const auto free = potential_eval(FreePotential{}, 1.0, 7.0);
    CHECK(free.value == 0.0);
    CHECK(free.first == 0.0);
    CHECK(free.second == 0.0);

    const auto lin = potential_eval(LinearPotential{0.25}, 1.0, 50.0);
    CHECK(lin.value == doctest::Approx(-12.5));
    CHECK(lin.first == doctest::Approx(-0.25));
    CHECK(lin.second == 0.0);

    const auto ho = potential_eval(HarmonicPotential{0.62832}, 1.0, 5.0);
    CHECK(ho.value == doctest::Approx(4.9348).epsilon(1e-4));
    CHECK(ho.first == doctest::Approx(1.9739).epsilon(1e-4));
    CHECK(ho.second == doctest::Approx(0.39478).epsilon(1e-4));
  }

  TEST_CASE("quadratic Taylor expansion is exact") {
    const PotentialSpec specs[] = {FreePotential{}, LinearPotential{-0.7}, HarmonicPotential{1.3}};
    for (const auto& spec : specs) {
      for (double x0 : {-3.0, 0.0, 2.5}) {
        const auto p = potential_eval(spec, 2.0, x0);
        for (double x : {-4.0, 0.3, 7.0}) {
          const double d = x - x0;
          CHECK(potential_eval(spec, 2.0, x).value ==
                doctest::Approx(p.value + p.first * d + 0.5 * p.second * d * d).epsilon(1e-13));
        }
      }
    }
  }

  TEST_CASE("setup validation") {
    PhysicalSetup s;
    CHECK_NOTHROW(validate(s));
    s.mass = 0.0;
    CHECK_THROWS_AS(validate(s), DomainError);
    s = PhysicalSetup{};
    s.hbar = -1.0;
    CHECK_THROWS_AS(validate(s), DomainError);
    s = PhysicalSetup{};
    s.gamma = -0.1;
    CHECK_THROWS_AS(validate(s), DomainError);
    s = PhysicalSetup{};
    s.potential = HarmonicPotential{0.0};
    CHECK_THROWS_AS(validate(s), DomainError);
  }

  TEST_CASE("non-positive linear slope is accepted but flagged") {
    PhysicalSetup s;
    s.potential = LinearPotential{-0.25};
    CHECK_NOTHROW(validate(s));
    CHECK(setup_warnings(s).size() == 1);
    s.potential = LinearPotential{0.25};
    CHECK(setup_warnings(s).empty());
  }

  TEST_CASE("contracted time") {
    CHECK(contracted_time(0.0, 4.0) == 4.0);
    CHECK(contracted_time(0.5, 40.0) == doctest::Approx((1.0 - std::exp(-20.0)) / 0.5).epsilon(1e-15));
    // gamma t << 1: series t - gamma t^2 / 2 + gamma^2 t^3 / 6.
    const double g = 1e-9;
    const double t = 4.0;
    CHECK(contracted_time(g, t) == doctest::Approx(t - g * t * t / 2.0 + g * g * t * t * t / 6.0).epsilon(1e-15));
    CHECK(ramp_time_squared(0.0, 3.0) == doctest::Approx(4.5));
    CHECK(ramp_time_squared(1e-9, 3.0) == doctest::Approx(4.5 - 1e-9 * 27.0 / 6.0).epsilon(1e-14));
    CHECK(ramp_time_squared(0.5, 10.0) == doctest::Approx((5.0 - 1.0 + std::exp(-5.0)) / 0.25).epsilon(1e-14));
  }

  TEST_CASE("describe") {
    PhysicalSetup s;
    s.gamma = 0.5;
    s.potential = LinearPotential{0.25};
    CHECK(describe(s) == "mass=1 hbar=1 gamma=0.5 potential=linear a=0.25");
  }

  TEST_CASE("table round trip is exact") {
    Table t;
    t.header = {"demo", "k=v"};
    t.columns = {"a", "b"};
    t.rows = {{0.1, 1.0 / 3.0}, {-2.5e-300, 6.02214076e23}};
    std::stringstream ss;
    write_table(ss, t);
    const Table back = read_table(ss);
    CHECK(back.header == t.header);
    CHECK(back.columns == t.columns);
    REQUIRE(back.rows.size() == 2);
    CHECK(back.rows[0][1] == t.rows[0][1]);
    CHECK(back.rows[1][0] == t.rows[1][0]);
    CHECK(back.column("b")[1] == t.rows[1][1]);
    CHECK_THROWS_AS(parse_row("1.0 x2"), ConfigError);
  }
}
