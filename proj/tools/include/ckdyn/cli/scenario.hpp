#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ckdyn/bohm.hpp"
#include "ckdyn/core.hpp"

namespace ckdyn::cli {

enum class ScenarioKind { Free, Linear, Harmonic, FreeSuperposition, HarmonicSuperposition, QuasiEigenstate };

enum class Engine { Closed, Ode, Grid };

const char* to_string(ScenarioKind kind);
const char* to_string(Engine engine);
ScenarioKind parse_kind(const std::string& text);
/// Accepts closed, closed_form, ode and grid.
Engine parse_engine(const std::string& text);
std::vector<Engine> parse_engines(const std::string& csv);

struct PacketSpec {
  double x0 = 0.0;
  double p0 = 0.0;
  double sigma0 = 1.0;
};

struct GridSettings {
  /// 0 selects the size automatically from the expected momentum content.
  std::size_t n_points = 0;
  /// Unset bounds are chosen to cover every packet by +-11 widths over the whole run.
  std::optional<double> x_min;
  std::optional<double> x_max;
  double dt = 1e-3;
  double absorbing_margin = 0.0;
  std::size_t max_points = 32768;
};

struct ScenarioConfig {
  std::string name = "run";
  ScenarioKind kind = ScenarioKind::Free;
  double mass = 1.0;
  double hbar = 1.0;
  double a = 0.0;
  double omega0 = 0.0;
  int eigen_n = 0;
  std::vector<PacketSpec> packets;
  std::vector<double> gammas;
  std::vector<Engine> engines;
  double t_end = 1.0;
  double record_dt = 0.1;
  double ode_dt = 1e-3;
  std::vector<double> density_times;
  std::size_t traj_count = 15;
  SamplingMode sampling = SamplingMode::Quantile;
  std::uint64_t seed = 1;
  double traj_dt = 1e-2;
  GridSettings grid;
  std::string out_dir = "ckdyn_out";

  PhysicalSetup setup_for(double gamma) const;
  bool has_engine(Engine e) const;
};

/// Throws ConfigError describing the first inconsistency found.
void validate(const ScenarioConfig& cfg);

/// Parses the INI document described in the README; symbolic values are resolved here.
ScenarioConfig parse_config(std::istream& is);
ScenarioConfig load_config(const std::string& path);

/// Resolved configuration in the same INI format (all values numeric).
void write_config(std::ostream& os, const ScenarioConfig& cfg);

std::vector<std::string> preset_names();
/// Embedded INI text of a preset; ConfigError for unknown names.
const std::string& preset_text(const std::string& name);
ScenarioConfig preset(const std::string& name);

}  // namespace ckdyn::cli
