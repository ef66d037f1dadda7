#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "ckdyn/cli/compare.hpp"
#include "ckdyn/cli/expression.hpp"
#include "ckdyn/cli/runner.hpp"
#include "ckdyn/cli/scenario.hpp"
#include "ckdyn/closed_form.hpp"
#include "ckdyn/errors.hpp"
#include "ckdyn/format.hpp"

using namespace ckdyn;
using namespace ckdyn::cli;

namespace fs = std::filesystem;

namespace {

ScenarioConfig parse(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

const char* kFree = R"([scenario]
name = t
kind = free
gamma = 0.1
engines = closed, ode
t_end = 1
record_dt = 0.5

[packet]
x0 = 0
p0 = 1
sigma0 = 1
)";

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("ckdyn_test_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

void write_obs(const fs::path& path, const std::vector<std::vector<double>>& rows) {
  Table t;
  t.columns = {"t", "mean_x", "dispersion", "energy", "norm"};
  t.rows = rows;
  write_table_file(path.string(), t);
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("expressions") {
    const Variables vars{{"omega0", 0.5}, {"hbar", 1.0}, {"mass", 1.0}};
    CHECK(evaluate("1 + 2 * 3", vars) == 7.0);
    CHECK(evaluate("(1 + 2) * 3", vars) == 9.0);
    CHECK(evaluate("2 ^ 3 ^ 2", vars) == 512.0);
    CHECK(evaluate("-2 ^ 2", vars) == -4.0);
    CHECK(evaluate("0.3*omega0", vars) == doctest::Approx(0.15).epsilon(1e-15));
    CHECK(evaluate("sqrt(hbar/(2*mass*omega0))", vars) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(evaluate("2*pi/10", vars) == doctest::Approx(0.6283185307179586).epsilon(1e-15));
    CHECK(evaluate("1e-3", vars) == 0.001);
    CHECK(evaluate("exp(log(3)) + abs(-1) + cos(0)", vars) == doctest::Approx(5.0).epsilon(1e-15));
    for (const char* bad : {"", "1 +", "(1", "foo", "sqrt(", "1 2", "log(-1)", "1/0", "sin(1, 2)"})
      CHECK_THROWS_AS(evaluate(bad, vars), ConfigError);
    CHECK(evaluate_list("1, 2*omega0 ,3", vars) == std::vector<double>{1.0, 1.0, 3.0});
    CHECK(evaluate_list("  ", vars).empty());
    CHECK_THROWS_AS(evaluate_list("1,,2", vars), ConfigError);
  }

  TEST_CASE("engine and kind names") {
    CHECK(parse_engines("closed_form, grid,ode,grid") == std::vector<Engine>{Engine::Closed, Engine::Grid, Engine::Ode});
    CHECK_THROWS_AS(parse_engine("spectral"), ConfigError);
    CHECK(parse_kind("harmonic_superposition") == ScenarioKind::HarmonicSuperposition);
    CHECK_THROWS_AS(parse_kind("quartic"), ConfigError);
  }

  TEST_CASE("presets resolve symbolic values") {
    CHECK(preset_names() == std::vector<std::string>{"fig1", "fig2", "fig3", "fig4", "fig5"});
    const auto f1 = preset("fig1");
    CHECK(f1.gammas == std::vector<double>{0.025, 0.1, 0.5});
    CHECK(f1.packets.size() == 1);
    CHECK(f1.packets[0].p0 == 2.5);
    const double w0 = 2.0 * kPi / 10.0;
    const auto f3 = preset("fig3");
    REQUIRE(f3.gammas.size() == 3);
    CHECK(f3.gammas[0] == doctest::Approx(0.3 * w0).epsilon(1e-15));
    CHECK(f3.gammas[2] == doctest::Approx(4.0 * w0).epsilon(1e-15));
    CHECK(f3.packets[0].sigma0 == doctest::Approx(std::sqrt(1.0 / (2.0 * w0))).epsilon(1e-15));
    const auto f5 = preset("fig5");
    REQUIRE(f5.density_times.size() == 4);
    for (int k = 0; k < 4; ++k) CHECK(f5.density_times[k] == doctest::Approx((2 * k + 1) * 5.0).epsilon(1e-12));
    CHECK(f5.t_end == doctest::Approx(35.0).epsilon(1e-12));
    const auto f2 = preset("fig2");
    CHECK(f2.kind == ScenarioKind::Linear);
    CHECK(f2.a == 0.25);
    CHECK(f2.packets[0].x0 == 50.0);
    const auto f4 = preset("fig4");
    CHECK(f4.packets.size() == 2);
    CHECK(f4.t_end == 20.0);
    CHECK_THROWS_AS(preset("fig6"), ConfigError);
  }

  TEST_CASE("config validation") {
    CHECK_NOTHROW(parse(kFree));
    const auto with = [](const std::string& from, const std::string& to) {
      std::string s = kFree;
      s.replace(s.find(from), from.size(), to);
      return s;
    };
    CHECK_THROWS_AS(parse(with("gamma = 0.1", "gamma = ")), ConfigError);
    CHECK_THROWS_AS(parse(with("gamma = 0.1", "gamma = -0.1")), ConfigError);
    CHECK_THROWS_AS(parse(with("engines = closed, ode", "engines = ")), ConfigError);
    CHECK_THROWS_AS(parse(with("kind = free", "kind = free\nomega0 = 1")), ConfigError);
    CHECK_THROWS_AS(parse(with("kind = free", "kind = harmonic")), ConfigError);
    CHECK_THROWS_AS(parse(with("kind = free", "kind = linear")), ConfigError);
    CHECK_THROWS_AS(parse(with("kind = free", "kind = free_superposition")), ConfigError);
    CHECK_THROWS_AS(parse(with("x0 = 0", "x0 = 0\nspeed = 1")), ConfigError);
    CHECK_THROWS_AS(parse(with("[packet]", "[packets]")), ConfigError);
    CHECK_THROWS_AS(parse(with("record_dt = 0.5", "record_dt = 0.3")), ConfigError);
    CHECK_THROWS_AS(parse(with("sigma0 = 1", "sigma0 = 0")), ConfigError);
    CHECK_THROWS_AS(parse(with("x0 = 0", "x0 = nope")), ConfigError);
    CHECK_THROWS_AS(parse("[scenario\nkind = free"), ConfigError);
  }

  TEST_CASE("superposition and eigenstate rules") {
    std::string h = preset_text("fig5");
    CHECK_NOTHROW(parse(h));
    h.replace(h.rfind("x0 = -5"), 7, "x0 = -4");
    CHECK_THROWS_AS(parse(h), ConfigError);
    h.replace(h.find("engines = closed, ode, grid"), 27, "engines = ode, grid");
    CHECK_NOTHROW(parse(h));

    const std::string q = R"([scenario]
kind = quasi_eigenstate
omega0 = 1
n = 2
gamma = 0.5
engines = closed, grid
t_end = 1
record_dt = 0.5
)";
    CHECK(parse(q).eigen_n == 2);
    std::string q_ode = q;
    q_ode.replace(q_ode.find("closed, grid"), 12, "closed, ode");
    CHECK_THROWS_AS(parse(q_ode), ConfigError);
    std::string q_over = q;
    q_over.replace(q_over.find("gamma = 0.5"), 11, "gamma = 2.5");
    CHECK_THROWS_AS(parse(q_over), ConfigError);
  }

  TEST_CASE("written config parses back to the same values") {
    const auto cfg = preset("fig3");
    std::ostringstream os;
    write_config(os, cfg);
    const auto back = parse(os.str());
    CHECK(back.gammas == cfg.gammas);
    CHECK(back.omega0 == cfg.omega0);
    CHECK(back.packets[0].sigma0 == cfg.packets[0].sigma0);
    CHECK(back.engines == cfg.engines);
    CHECK(back.grid.max_points == cfg.grid.max_points);
    CHECK(back.traj_dt == cfg.traj_dt);
  }

  TEST_CASE("domain plan covers the packet and resolves its momentum") {
    auto cfg = preset("fig1");
    const auto plan = plan_domain(cfg, 0.5);
    CHECK(plan.horizon == cfg.t_end);
    CHECK((plan.n_points & (plan.n_points - 1)) == 0);
    CHECK(plan.n_points >= 4096);
    const PhysicalSetup setup = cfg.setup_for(0.5);
    for (double t : {0.0, 20.0, 40.0}) {
      const auto s = free_params(t, 0.0, 2.5, 1.0, setup);
      CHECK(plan.x_min <= s.X - 11.0 * s.dispersion(1.0));
      CHECK(plan.x_max >= s.X + 11.0 * s.dispersion(1.0));
    }
    const double dx = (plan.x_max - plan.x_min) / static_cast<double>(plan.n_points);
    CHECK(kPi / (8.0 * dx) >= 2.5 + 8.0 * 0.5);

    // Momentum growth under strong damping caps the horizon.
    auto strong = preset("fig3");
    const auto capped = plan_domain(strong, strong.gammas[2]);
    CHECK(capped.horizon < strong.t_end);
    CHECK(capped.n_points == strong.grid.max_points);
  }

  TEST_CASE("tolerance files") {
    const auto dir = scratch("tol");
    {
      std::ofstream out(dir / "tol.ini");
      out << "[closed_ode]\nobservables = 1e-9\n[grid]\ndensity = 2e-4\n";
    }
    const auto tol = load_tolerances((dir / "tol.ini").string());
    CHECK(tol.analytic.observables == 1e-9);
    CHECK(tol.analytic.trajectories == 1e-8);
    CHECK(tol.grid.density == 2e-4);
    CHECK(&tol.for_pair(Engine::Closed, Engine::Grid) == &tol.grid);
    CHECK(&tol.for_pair(Engine::Ode, Engine::Closed) == &tol.analytic);
    {
      std::ofstream out(dir / "bad.ini");
      out << "[grid]\nspeed = 1\n";
    }
    CHECK_THROWS_AS(load_tolerances((dir / "bad.ini").string()), ConfigError);
  }

  TEST_CASE("comparison of synthetic outputs") {
    const auto dir = scratch("compare");
    write_obs(dir / "s_g0_closed_observables.txt", {{0, 1, 1, 2, 1}, {1, 2, 1, 2, 1}, {2, 3, 1, 2, 1}});
    write_obs(dir / "s_g0_grid_observables.txt", {{0, 1, 1, 2, 1}, {1, 2.003, 1, 2, 1}});
    write_obs(dir / "s_g0_ode_observables.txt", {{0, 1, 1, 2, 1}, {1, 2, 1, 2, 1}, {2, 3, 1, 2, 1}});
    const auto report = compare_directory(dir.string(), "s", Tolerances{});
    // Three pairs, four observables each.
    REQUIRE(report.entries.size() == 12);
    std::size_t failing = 0;
    for (const auto& e : report.entries) {
      CHECK(e.error >= 0.0);
      CHECK(e.mean_error <= e.error);
      if (e.engine_a == Engine::Closed && e.engine_b == Engine::Ode) CHECK(e.error == 0.0);
      if (e.engine_b == Engine::Grid) CHECK(e.samples == 2);
      if (!e.passed()) {
        ++failing;
        CHECK(e.quantity == "mean_x");
        // max |dx| / max(|x|, dispersion) over the shared prefix.
        CHECK(e.error == doctest::Approx(0.003 / 2.003).epsilon(1e-9));
      }
    }
    CHECK(failing == 2);
    CHECK_FALSE(report.passed());

    write_obs(dir / "s_g0_grid_observables.txt", {{0, 1, 1, 2, 1}, {1.5, 2, 1, 2, 1}});
    CHECK_THROWS_AS(compare_directory(dir.string(), "s", Tolerances{}), ConfigError);
    CHECK_THROWS_AS(compare_directory(dir.string(), "other", Tolerances{}), ConfigError);
  }

  TEST_CASE("small scenario end to end") {
    const auto dir = scratch("run");
    auto cfg = parse(kFree);
    cfg.engines = {Engine::Closed, Engine::Ode, Engine::Grid};
    cfg.traj_count = 5;
    cfg.density_times = {1.0};
    cfg.out_dir = dir.string();
    const auto result = run_scenario(cfg, Tolerances{});
    CHECK(result.exit_code == kExitOk);
    CHECK(result.compared);
    CHECK(result.runs.size() == 3);
    for (const auto& r : result.runs) CHECK(r.state == RunState::Ok);
    for (const char* f : {"t_g0_grid_observables.txt", "t_g0_closed_trajectories.txt", "t_g0_ode_density_0.txt",
                          "t_config.ini", "t_report.txt", "t_runs.txt"})
      CHECK(fs::exists(dir / f));
    const auto traj = read_table_file((dir / "t_g0_closed_trajectories.txt").string());
    CHECK(traj.columns.size() == 7);
    CHECK(traj.rows.size() == 3);
    // The resolved config reproduces the run configuration.
    const auto back = load_config((dir / "t_config.ini").string());
    CHECK(back.engines == cfg.engines);
    CHECK(back.traj_count == 5);
  }
}
