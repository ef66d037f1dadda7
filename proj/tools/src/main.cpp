#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "ckdyn/cli/compare.hpp"
#include "ckdyn/cli/expression.hpp"
#include "ckdyn/cli/runner.hpp"
#include "ckdyn/cli/scenario.hpp"
#include "ckdyn/errors.hpp"

namespace {

using namespace ckdyn::cli;

struct RunOptions {
  std::string preset;
  std::string config;
  std::string engines;
  std::string gammas;
  std::optional<std::size_t> traj;
  std::optional<std::uint64_t> seed;
  std::string sampling;
  std::string out;
  std::string tol;
  bool quiet = false;
};

int do_run(const RunOptions& o) {
  ScenarioConfig cfg = o.preset.empty() ? load_config(o.config) : preset(o.preset);
  if (!o.engines.empty()) cfg.engines = parse_engines(o.engines);
  if (!o.gammas.empty()) {
    Variables vars{{"mass", cfg.mass}, {"hbar", cfg.hbar}, {"omega0", cfg.omega0}, {"a", cfg.a}};
    cfg.gammas = evaluate_list(o.gammas, vars);
  }
  if (o.traj) cfg.traj_count = *o.traj;
  if (o.seed) cfg.seed = *o.seed;
  if (o.sampling == "quantile") cfg.sampling = ckdyn::SamplingMode::Quantile;
  if (o.sampling == "random") cfg.sampling = ckdyn::SamplingMode::Random;
  if (!o.out.empty()) cfg.out_dir = o.out;
  validate(cfg);
  const Tolerances tol = o.tol.empty() ? Tolerances{} : load_tolerances(o.tol);

  const RunResult result = run_scenario(cfg, tol, o.quiet ? nullptr : &std::cerr);
  if (result.compared) write_report(std::cout, result.comparison);
  std::cout << "runs:";
  for (const auto& r : result.runs)
    std::cout << ' ' << r.gamma_index << '/' << to_string(r.engine) << '=' << to_string(r.state);
  std::cout << "\nreport: " << cfg.out_dir << '/' << cfg.name << "_report.txt\nexit_code=" << result.exit_code << '\n';
  return result.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Damped quantum dynamics: closed-form, ODE and grid engines with Bohmian trajectories"};
  app.require_subcommand(1);

  RunOptions run;
  auto* run_cmd = app.add_subcommand("run", "Run a preset or configured scenario and compare engines");
  auto* preset_opt = run_cmd->add_option("--preset", run.preset, "Built-in scenario (fig1 ... fig5)");
  auto* config_opt = run_cmd->add_option("--config", run.config, "Scenario INI file")->check(CLI::ExistingFile);
  preset_opt->excludes(config_opt);
  run_cmd->add_option("--engines", run.engines, "Comma-separated subset of closed, ode, grid");
  run_cmd->add_option("--gamma", run.gammas, "Comma-separated friction values (expressions allowed)");
  run_cmd->add_option("--traj", run.traj, "Number of Bohmian trajectories per run");
  run_cmd->add_option("--seed", run.seed, "Seed for random launches");
  run_cmd->add_option("--sampling", run.sampling, "Launch sampling")->check(CLI::IsMember({"quantile", "random"}));
  run_cmd->add_option("--out", run.out, "Output directory");
  run_cmd->add_option("--tol", run.tol, "Tolerance INI file")->check(CLI::ExistingFile);
  run_cmd->add_flag("--quiet", run.quiet, "Suppress progress lines");

  std::string dir, scenario, tol_path;
  auto* cmp_cmd = app.add_subcommand("compare", "Compare engine outputs found in a directory");
  cmp_cmd->add_option("--dir", dir, "Directory holding run outputs")->required();
  cmp_cmd->add_option("--scenario", scenario, "Restrict to one scenario name");
  cmp_cmd->add_option("--tol", tol_path, "Tolerance INI file")->check(CLI::ExistingFile);

  std::string show;
  auto* presets_cmd = app.add_subcommand("presets", "List built-in scenarios or print one");
  presets_cmd->add_option("--show", show, "Print the INI text of a preset");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (*run_cmd) {
      if (run.preset.empty() && run.config.empty()) throw ckdyn::ConfigError("run needs --preset or --config");
      return do_run(run);
    }
    if (*cmp_cmd) {
      const Tolerances tol = tol_path.empty() ? Tolerances{} : load_tolerances(tol_path);
      const ComparisonReport report = compare_directory(dir, scenario, tol);
      write_report(std::cout, report);
      return report.passed() ? kExitOk : kExitTolerance;
    }
    if (*presets_cmd) {
      if (!show.empty()) {
        std::cout << preset_text(show);
      } else {
        for (const auto& name : preset_names()) std::cout << name << '\n';
      }
      return kExitOk;
    }
  } catch (const ckdyn::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const ckdyn::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const ckdyn::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  }
  return kExitOk;
}
