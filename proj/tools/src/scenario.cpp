#include "ckdyn/cli/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "ckdyn/cli/expression.hpp"
#include "ckdyn/closed_form.hpp"
#include "ckdyn/errors.hpp"
#include "ckdyn/format.hpp"

namespace ckdyn::cli {

namespace pt = boost::property_tree;

const char* to_string(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::Free: return "free";
    case ScenarioKind::Linear: return "linear";
    case ScenarioKind::Harmonic: return "harmonic";
    case ScenarioKind::FreeSuperposition: return "free_superposition";
    case ScenarioKind::HarmonicSuperposition: return "harmonic_superposition";
    case ScenarioKind::QuasiEigenstate: return "quasi_eigenstate";
  }
  return "unknown";
}

const char* to_string(Engine engine) {
  switch (engine) {
    case Engine::Closed: return "closed";
    case Engine::Ode: return "ode";
    case Engine::Grid: return "grid";
  }
  return "unknown";
}

ScenarioKind parse_kind(const std::string& text) {
  for (auto k : {ScenarioKind::Free, ScenarioKind::Linear, ScenarioKind::Harmonic, ScenarioKind::FreeSuperposition,
                 ScenarioKind::HarmonicSuperposition, ScenarioKind::QuasiEigenstate})
    if (text == to_string(k)) return k;
  throw ConfigError("unknown scenario kind '" + text + "'");
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv(const std::string& csv) {
  std::vector<std::string> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

}  // namespace

Engine parse_engine(const std::string& text) {
  if (text == "closed" || text == "closed_form") return Engine::Closed;
  if (text == "ode") return Engine::Ode;
  if (text == "grid") return Engine::Grid;
  throw ConfigError("unknown engine '" + text + "' (expected closed, ode or grid)");
}

std::vector<Engine> parse_engines(const std::string& csv) {
  std::vector<Engine> out;
  for (const auto& item : split_csv(csv)) {
    const Engine e = parse_engine(item);
    if (std::find(out.begin(), out.end(), e) == out.end()) out.push_back(e);
  }
  return out;
}

PhysicalSetup ScenarioConfig::setup_for(double gamma) const {
  PhysicalSetup s;
  s.mass = mass;
  s.hbar = hbar;
  s.gamma = gamma;
  switch (kind) {
    case ScenarioKind::Free:
    case ScenarioKind::FreeSuperposition:
      s.potential = FreePotential{};
      break;
    case ScenarioKind::Linear:
      s.potential = LinearPotential{a};
      break;
    case ScenarioKind::Harmonic:
    case ScenarioKind::HarmonicSuperposition:
    case ScenarioKind::QuasiEigenstate:
      s.potential = HarmonicPotential{omega0};
      break;
  }
  return s;
}

bool ScenarioConfig::has_engine(Engine e) const {
  return std::find(engines.begin(), engines.end(), e) != engines.end();
}

namespace {

bool is_multiple(double value, double step) {
  const double r = value / step;
  return std::abs(r - std::round(r)) <= 1e-9 * std::max(1.0, std::abs(r));
}

std::size_t expected_packets(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::FreeSuperposition:
    case ScenarioKind::HarmonicSuperposition:
      return 2;
    case ScenarioKind::QuasiEigenstate:
      return 0;
    default:
      return 1;
  }
}

bool is_harmonic_kind(ScenarioKind k) {
  return k == ScenarioKind::Harmonic || k == ScenarioKind::HarmonicSuperposition || k == ScenarioKind::QuasiEigenstate;
}

}  // namespace

void validate(const ScenarioConfig& cfg) {
  if (cfg.name.empty() || cfg.name.find_first_of("/\\ ") != std::string::npos)
    throw ConfigError("scenario name must be non-empty and contain no spaces or slashes");
  if (!(cfg.mass > 0.0) || !(cfg.hbar > 0.0)) throw ConfigError("mass and hbar must be positive");
  if (cfg.gammas.empty()) throw ConfigError("gamma list is empty");
  for (double g : cfg.gammas)
    if (!(g >= 0.0)) throw ConfigError("gamma values must be non-negative");
  if (cfg.engines.empty()) throw ConfigError("at least one engine is required");
  if (!(cfg.t_end > 0.0)) throw ConfigError("t_end must be positive");
  if (!(cfg.record_dt > 0.0) || cfg.record_dt > cfg.t_end) throw ConfigError("record_dt must lie in (0, t_end]");
  if (!(cfg.ode_dt > 0.0)) throw ConfigError("ode_dt must be positive");
  if (!(cfg.traj_dt > 0.0)) throw ConfigError("trajectory dt must be positive");
  if (!is_multiple(cfg.record_dt, cfg.traj_dt)) throw ConfigError("record_dt must be a multiple of the trajectory dt");
  if (!is_multiple(cfg.t_end, cfg.record_dt)) throw ConfigError("t_end must be a multiple of record_dt");
  for (double t : cfg.density_times)
    if (!(t >= 0.0 && t <= cfg.t_end)) throw ConfigError("density times must lie in [0, t_end]");
  if (!std::is_sorted(cfg.density_times.begin(), cfg.density_times.end()))
    throw ConfigError("density times must be sorted");

  const bool harmonic = is_harmonic_kind(cfg.kind);
  if (harmonic && !(cfg.omega0 > 0.0)) throw ConfigError(std::string(to_string(cfg.kind)) + " needs omega0 > 0");
  if (!harmonic && cfg.omega0 != 0.0) throw ConfigError("omega0 is only meaningful for harmonic scenarios");
  if (cfg.kind == ScenarioKind::Linear && cfg.a == 0.0) throw ConfigError("linear scenario needs a non-zero slope a");
  if (cfg.kind != ScenarioKind::Linear && cfg.a != 0.0) throw ConfigError("slope a is only meaningful for linear scenarios");

  if (cfg.packets.size() != expected_packets(cfg.kind))
    throw ConfigError(std::string(to_string(cfg.kind)) + " expects " + std::to_string(expected_packets(cfg.kind)) +
                      " packet(s), got " + std::to_string(cfg.packets.size()));
  for (const auto& p : cfg.packets)
    if (!(p.sigma0 > 0.0)) throw ConfigError("packet sigma0 must be positive");

  if (cfg.kind == ScenarioKind::HarmonicSuperposition && cfg.has_engine(Engine::Closed)) {
    const auto& a = cfg.packets[0];
    const auto& b = cfg.packets[1];
    if (a.x0 != -b.x0 || a.p0 != -b.p0 || a.sigma0 != b.sigma0)
      throw ConfigError("the closed engine needs mirror-symmetric harmonic packets (x0, p0 -> -x0, -p0)");
  }
  if (cfg.kind == ScenarioKind::QuasiEigenstate) {
    if (cfg.eigen_n < 0 || cfg.eigen_n > kMaxHermiteOrder) throw ConfigError("eigenstate order n must lie in [0, 50]");
    if (cfg.eigen_n != 0 && cfg.has_engine(Engine::Ode))
      throw ConfigError("the ode engine represents only the Gaussian quasi-eigenstate n = 0");
    for (double g : cfg.gammas)
      if (!(cfg.omega0 > 0.5 * g)) throw ConfigError("quasi-eigenstates need omega0 > gamma/2 for every gamma");
  }

  const auto& g = cfg.grid;
  if (!(g.dt > 0.0)) throw ConfigError("grid dt must be positive");
  if (g.x_min.has_value() != g.x_max.has_value()) throw ConfigError("set both grid x_min and x_max or neither");
  if (g.x_min && !(*g.x_max > *g.x_min)) throw ConfigError("grid x_max must exceed x_min");
  if (g.n_points != 0 && (g.n_points < 16 || (g.n_points & (g.n_points - 1)) != 0))
    throw ConfigError("grid n_points must be a power of two >= 16");
  if (!(g.absorbing_margin >= 0.0 && g.absorbing_margin <= 0.2)) throw ConfigError("absorbing_margin must lie in [0, 0.2]");
  if (g.max_points < 16 || (g.max_points & (g.max_points - 1)) != 0)
    throw ConfigError("grid max_points must be a power of two >= 16");
  if (cfg.has_engine(Engine::Grid)) {
    if (!is_multiple(cfg.record_dt, g.dt)) throw ConfigError("record_dt must be a multiple of the grid dt");
    for (double t : cfg.density_times)
      if (!is_multiple(t, g.dt)) throw ConfigError("density times must be multiples of the grid dt");
    if (cfg.traj_count > 0 && !is_multiple(cfg.traj_dt, 2.0 * g.dt))
      throw ConfigError("the trajectory dt must be an even multiple of the grid dt");
  }
}

namespace {

using Section = std::map<std::string, std::string>;

struct Document {
  std::map<std::string, Section> sections;

  std::optional<std::string> get(const std::string& section, const std::string& key) const {
    const auto s = sections.find(section);
    if (s == sections.end()) return std::nullopt;
    const auto k = s->second.find(key);
    if (k == s->second.end()) return std::nullopt;
    return trim(k->second);
  }
};

const std::map<std::string, std::set<std::string>>& schema() {
  static const std::map<std::string, std::set<std::string>> s = {
      {"scenario", {"name", "kind", "mass", "hbar", "a", "omega0", "n", "gamma", "engines", "t_end", "record_dt", "ode_dt",
                    "density_times"}},
      {"packet", {"x0", "p0", "sigma0"}},
      {"packet1", {"x0", "p0", "sigma0"}},
      {"packet2", {"x0", "p0", "sigma0"}},
      {"trajectories", {"count", "sampling", "seed", "dt"}},
      {"grid", {"n_points", "x_min", "x_max", "dt", "absorbing_margin", "max_points"}},
      {"output", {"dir"}},
  };
  return s;
}

Document read_document(std::istream& is) {
  pt::ptree tree;
  try {
    pt::read_ini(is, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  Document doc;
  for (const auto& [name, node] : tree) {
    if (node.empty()) throw ConfigError("key '" + name + "' must belong to a section");
    const auto known = schema().find(name);
    if (known == schema().end()) throw ConfigError("unknown config section [" + name + "]");
    for (const auto& [key, value] : node) {
      if (!known->second.count(key)) throw ConfigError("unknown key '" + key + "' in [" + name + "]");
      doc.sections[name][key] = value.data();
    }
  }
  return doc;
}

double number(const Document& doc, const std::string& sec, const std::string& key, double fallback,
              const Variables& vars) {
  const auto v = doc.get(sec, key);
  return v ? evaluate(*v, vars) : fallback;
}

std::size_t count_value(double v, const std::string& what) {
  if (!(v >= 0.0) || v != std::floor(v) || v > 1e15) throw ConfigError(what + " must be a non-negative integer");
  return static_cast<std::size_t>(v);
}

PacketSpec read_packet(const Document& doc, const std::string& sec, const Variables& vars) {
  if (!doc.sections.count(sec)) throw ConfigError("missing section [" + sec + "]");
  PacketSpec p;
  p.x0 = number(doc, sec, "x0", 0.0, vars);
  p.p0 = number(doc, sec, "p0", 0.0, vars);
  p.sigma0 = number(doc, sec, "sigma0", 1.0, vars);
  return p;
}

}  // namespace

ScenarioConfig parse_config(std::istream& is) {
  const Document doc = read_document(is);
  if (!doc.sections.count("scenario")) throw ConfigError("missing section [scenario]");
  ScenarioConfig cfg;
  Variables vars;
  if (auto v = doc.get("scenario", "name")) cfg.name = *v;
  const auto kind = doc.get("scenario", "kind");
  if (!kind) throw ConfigError("missing scenario kind");
  cfg.kind = parse_kind(*kind);

  cfg.mass = number(doc, "scenario", "mass", 1.0, vars);
  vars["mass"] = cfg.mass;
  cfg.hbar = number(doc, "scenario", "hbar", 1.0, vars);
  vars["hbar"] = cfg.hbar;
  cfg.a = number(doc, "scenario", "a", 0.0, vars);
  vars["a"] = cfg.a;
  cfg.omega0 = number(doc, "scenario", "omega0", 0.0, vars);
  vars["omega0"] = cfg.omega0;
  if (cfg.omega0 > 0.0) vars["tau0"] = 2.0 * kPi / cfg.omega0;
  const double n = number(doc, "scenario", "n", 0.0, vars);
  if (n != std::floor(n) || n < 0.0) throw ConfigError("eigenstate order n must be a non-negative integer");
  cfg.eigen_n = static_cast<int>(n);

  const auto gammas = doc.get("scenario", "gamma");
  if (!gammas) throw ConfigError("missing gamma list");
  cfg.gammas = evaluate_list(*gammas, vars);
  cfg.engines = parse_engines(doc.get("scenario", "engines").value_or("closed, ode, grid"));
  cfg.t_end = number(doc, "scenario", "t_end", cfg.t_end, vars);
  vars["t_end"] = cfg.t_end;
  cfg.record_dt = number(doc, "scenario", "record_dt", cfg.record_dt, vars);
  cfg.ode_dt = number(doc, "scenario", "ode_dt", cfg.ode_dt, vars);
  if (auto v = doc.get("scenario", "density_times")) cfg.density_times = evaluate_list(*v, vars);

  switch (expected_packets(cfg.kind)) {
    case 1:
      cfg.packets.push_back(read_packet(doc, "packet", vars));
      break;
    case 2:
      cfg.packets.push_back(read_packet(doc, "packet1", vars));
      cfg.packets.push_back(read_packet(doc, "packet2", vars));
      break;
    default:
      break;
  }

  cfg.traj_count = count_value(number(doc, "trajectories", "count", 15.0, vars), "trajectory count");
  const std::string sampling = doc.get("trajectories", "sampling").value_or("quantile");
  if (sampling == "quantile") {
    cfg.sampling = SamplingMode::Quantile;
  } else if (sampling == "random") {
    cfg.sampling = SamplingMode::Random;
  } else {
    throw ConfigError("sampling must be quantile or random");
  }
  cfg.seed = count_value(number(doc, "trajectories", "seed", 1.0, vars), "seed");
  cfg.traj_dt = number(doc, "trajectories", "dt", cfg.traj_dt, vars);

  const auto opt_number = [&](const std::string& key) -> std::optional<double> {
    const auto v = doc.get("grid", key);
    if (!v || *v == "auto") return std::nullopt;
    return evaluate(*v, vars);
  };
  if (auto v = opt_number("n_points")) cfg.grid.n_points = count_value(*v, "grid n_points");
  cfg.grid.x_min = opt_number("x_min");
  cfg.grid.x_max = opt_number("x_max");
  cfg.grid.dt = number(doc, "grid", "dt", cfg.grid.dt, vars);
  cfg.grid.absorbing_margin = number(doc, "grid", "absorbing_margin", 0.0, vars);
  if (auto v = opt_number("max_points")) cfg.grid.max_points = count_value(*v, "grid max_points");

  if (auto v = doc.get("output", "dir")) cfg.out_dir = *v;
  validate(cfg);
  return cfg;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  return parse_config(in);
}

void write_config(std::ostream& os, const ScenarioConfig& cfg) {
  const auto list = [](const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + format_double(v[i]);
    return s;
  };
  os << "[scenario]\n";
  os << "name = " << cfg.name << "\n";
  os << "kind = " << to_string(cfg.kind) << "\n";
  os << "mass = " << format_double(cfg.mass) << "\n";
  os << "hbar = " << format_double(cfg.hbar) << "\n";
  if (cfg.a != 0.0) os << "a = " << format_double(cfg.a) << "\n";
  if (cfg.omega0 != 0.0) os << "omega0 = " << format_double(cfg.omega0) << "\n";
  if (cfg.kind == ScenarioKind::QuasiEigenstate) os << "n = " << cfg.eigen_n << "\n";
  os << "gamma = " << list(cfg.gammas) << "\n";
  os << "engines = ";
  for (std::size_t i = 0; i < cfg.engines.size(); ++i) os << (i ? ", " : "") << to_string(cfg.engines[i]);
  os << "\n";
  os << "t_end = " << format_double(cfg.t_end) << "\n";
  os << "record_dt = " << format_double(cfg.record_dt) << "\n";
  os << "ode_dt = " << format_double(cfg.ode_dt) << "\n";
  if (!cfg.density_times.empty()) os << "density_times = " << list(cfg.density_times) << "\n";
  for (std::size_t i = 0; i < cfg.packets.size(); ++i) {
    os << "\n[" << (cfg.packets.size() == 1 ? std::string("packet") : "packet" + std::to_string(i + 1)) << "]\n";
    os << "x0 = " << format_double(cfg.packets[i].x0) << "\n";
    os << "p0 = " << format_double(cfg.packets[i].p0) << "\n";
    os << "sigma0 = " << format_double(cfg.packets[i].sigma0) << "\n";
  }
  os << "\n[trajectories]\n";
  os << "count = " << cfg.traj_count << "\n";
  os << "sampling = " << (cfg.sampling == SamplingMode::Quantile ? "quantile" : "random") << "\n";
  os << "seed = " << cfg.seed << "\n";
  os << "dt = " << format_double(cfg.traj_dt) << "\n";
  os << "\n[grid]\n";
  os << "n_points = " << (cfg.grid.n_points ? std::to_string(cfg.grid.n_points) : "auto") << "\n";
  os << "x_min = " << (cfg.grid.x_min ? format_double(*cfg.grid.x_min) : "auto") << "\n";
  os << "x_max = " << (cfg.grid.x_max ? format_double(*cfg.grid.x_max) : "auto") << "\n";
  os << "dt = " << format_double(cfg.grid.dt) << "\n";
  os << "absorbing_margin = " << format_double(cfg.grid.absorbing_margin) << "\n";
  os << "max_points = " << cfg.grid.max_points << "\n";
  os << "\n[output]\n";
  os << "dir = " << cfg.out_dir << "\n";
}

namespace {

const std::map<std::string, std::string>& presets() {
  static const std::map<std::string, std::string> p = {
      {"fig1", R"([scenario]
name = fig1
kind = free
gamma = 0.025, 0.1, 0.5
engines = closed, ode, grid
t_end = 40
record_dt = 0.5
density_times = 20, 40

[packet]
x0 = 0
p0 = 2.5
sigma0 = 1

[trajectories]
count = 15
dt = 0.02

[grid]
dt = 2e-3
)"},
      {"fig2", R"([scenario]
name = fig2
kind = linear
a = 0.25
gamma = 0.025, 0.1, 0.5
engines = closed, ode, grid
t_end = 40
record_dt = 0.5
density_times = 20

[packet]
x0 = 50
p0 = 0
sigma0 = 1

[trajectories]
count = 15
dt = 0.02

[grid]
dt = 2e-3
)"},
      {"fig3", R"([scenario]
name = fig3
kind = harmonic
omega0 = 2*pi/10
gamma = 0.3*omega0, 2*omega0, 4*omega0
engines = closed, ode, grid
t_end = 40
record_dt = 0.5
density_times = tau0/2, tau0

[packet]
x0 = 5
p0 = 0
sigma0 = sqrt(hbar/(2*mass*omega0))

[trajectories]
count = 15
dt = 0.01

[grid]
dt = 1e-3
max_points = 16384
)"},
      {"fig4", R"([scenario]
name = fig4
kind = free_superposition
gamma = 0.025, 0.1, 0.5
engines = closed, ode, grid
t_end = 20
record_dt = 0.5
density_times = 20

[packet1]
x0 = 5
p0 = 0
sigma0 = 1

[packet2]
x0 = -5
p0 = 0
sigma0 = 1

[trajectories]
count = 30
dt = 0.01

[grid]
dt = 1e-3
)"},
      {"fig5", R"([scenario]
name = fig5
kind = harmonic_superposition
omega0 = 2*pi/10
gamma = 0.3*omega0, 2*omega0, 4*omega0
engines = closed, ode, grid
t_end = 7*tau0/2
record_dt = 0.5
density_times = tau0/2, 3*tau0/2, 5*tau0/2, 7*tau0/2

[packet1]
x0 = 5
p0 = 0
sigma0 = sqrt(hbar/(2*mass*omega0))

[packet2]
x0 = -5
p0 = 0
sigma0 = sqrt(hbar/(2*mass*omega0))

[trajectories]
count = 30
dt = 0.002

[grid]
dt = 1e-3
max_points = 16384
)"},
  };
  return p;
}

}  // namespace

std::vector<std::string> preset_names() {
  std::vector<std::string> out;
  for (const auto& [k, v] : presets()) out.push_back(k);
  return out;
}

const std::string& preset_text(const std::string& name) {
  const auto it = presets().find(name);
  if (it == presets().end()) throw ConfigError("unknown preset '" + name + "'");
  return it->second;
}

ScenarioConfig preset(const std::string& name) {
  std::istringstream in(preset_text(name));
  return parse_config(in);
}

}  // namespace ckdyn::cli
