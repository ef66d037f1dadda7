#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "ckdyn/cli/scenario.hpp"

namespace ckdyn::cli {

struct ToleranceSet {
  /// Max abs difference normalized by the series scale.
  double observables = 0.0;
  /// Max abs difference of trajectory positions normalized by the ensemble scale.
  double trajectories = 0.0;
  /// Relative L2 distance of densities.
  double density = 0.0;
};

struct Tolerances {
  /// closed vs ode.
  ToleranceSet analytic{1e-8, 1e-8, 1e-8};
  /// Any pair involving the grid engine.
  ToleranceSet grid{1e-3, 1e-3, 1e-4};

  const ToleranceSet& for_pair(Engine a, Engine b) const;
};

/// INI with optional sections [closed_ode] and [grid], keys observables, trajectories, density.
Tolerances load_tolerances(const std::string& path);

struct ComparisonEntry {
  std::string scenario;
  int gamma_index = 0;
  Engine engine_a = Engine::Closed;
  Engine engine_b = Engine::Ode;
  /// e.g. "mean_x", "trajectories", "density_1".
  std::string quantity;
  /// Last time covered by both series (snapshot time for densities).
  double t_compared = 0.0;
  std::size_t samples = 0;
  /// Max error (relative L2 for densities); the pass/fail figure.
  double error = 0.0;
  /// Mean of the same pointwise error (mean |drho| / max rho for densities).
  double mean_error = 0.0;
  double tolerance = 0.0;

  bool passed() const { return error <= tolerance; }
};

struct ComparisonReport {
  std::vector<ComparisonEntry> entries;

  bool passed() const;
  std::size_t failures() const;
};

/// Compares every engine pair found in `dir` for files named
/// <scenario>_g<i>_<engine>_{observables,trajectories,density_<k>}.txt.
/// An empty `scenario` compares all scenarios present. Series are compared over the time
/// prefix common to both files; mismatched time or position columns raise ConfigError.
ComparisonReport compare_directory(const std::string& dir, const std::string& scenario, const Tolerances& tol);

void write_report(std::ostream& os, const ComparisonReport& report);

}  // namespace ckdyn::cli
