#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "ckdyn/cli/compare.hpp"
#include "ckdyn/cli/scenario.hpp"

namespace ckdyn::cli {

/// Exit codes of the command-line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitTolerance = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;

/// Grid shared by all engines of one gamma (densities are written on it).
struct DomainPlan {
  double x_min = 0.0;
  double x_max = 0.0;
  std::size_t n_points = 0;
  /// Last record time at which the planned grid still resolves the expected state.
  double horizon = 0.0;
};

/// Domain covering every packet by +-11 widths and momenta |P| + 8 sigma_P up to the
/// horizon, with at least 4096 points and at most cfg.grid.max_points.
DomainPlan plan_domain(const ScenarioConfig& cfg, double gamma);

enum class RunState { Ok, Truncated, Failed };

const char* to_string(RunState state);

struct RunStatus {
  int gamma_index = 0;
  double gamma = 0.0;
  Engine engine = Engine::Closed;
  RunState state = RunState::Ok;
  /// Last recorded time.
  double t_reached = 0.0;
  std::string detail;
  double seconds = 0.0;
};

struct RunResult {
  std::vector<RunStatus> runs;
  std::vector<DomainPlan> plans;
  ComparisonReport comparison;
  bool compared = false;
  int exit_code = kExitOk;
};

/// Runs every (gamma, engine) pair concurrently, writes the per-run files into cfg.out_dir,
/// then compares engines. Progress lines go to `log` when non-null.
RunResult run_scenario(const ScenarioConfig& cfg, const Tolerances& tol, std::ostream* log = nullptr);

}  // namespace ckdyn::cli
