#include "ckdyn/cli/compare.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <regex>
#include <tuple>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "ckdyn/cli/expression.hpp"
#include "ckdyn/errors.hpp"
#include "ckdyn/format.hpp"

namespace ckdyn::cli {

namespace fs = std::filesystem;

const ToleranceSet& Tolerances::for_pair(Engine a, Engine b) const {
  return (a == Engine::Grid || b == Engine::Grid) ? grid : analytic;
}

Tolerances load_tolerances(const std::string& path) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::read_ini(path, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(std::string("cannot read tolerance file: ") + e.what());
  }
  Tolerances tol;
  for (const auto& [section, node] : tree) {
    ToleranceSet* set = nullptr;
    if (section == "closed_ode") {
      set = &tol.analytic;
    } else if (section == "grid") {
      set = &tol.grid;
    } else {
      throw ConfigError("unknown tolerance section [" + section + "]");
    }
    for (const auto& [key, value] : node) {
      const double v = evaluate(value.data(), {});
      if (!(v >= 0.0)) throw ConfigError("tolerances must be non-negative");
      if (key == "observables") {
        set->observables = v;
      } else if (key == "trajectories") {
        set->trajectories = v;
      } else if (key == "density") {
        set->density = v;
      } else {
        throw ConfigError("unknown tolerance key '" + key + "'");
      }
    }
  }
  return tol;
}

bool ComparisonReport::passed() const { return failures() == 0; }

std::size_t ComparisonReport::failures() const {
  return static_cast<std::size_t>(
      std::count_if(entries.begin(), entries.end(), [](const ComparisonEntry& e) { return !e.passed(); }));
}

namespace {

constexpr double kTiny = 1e-300;

// Common time prefix of two tables whose first column is t.
std::size_t aligned_rows(const Table& a, const Table& b, const std::string& what) {
  const std::size_t n = std::min(a.rows.size(), b.rows.size());
  for (std::size_t k = 0; k < n; ++k) {
    const double ta = a.rows[k][0];
    const double tb = b.rows[k][0];
    if (std::abs(ta - tb) > 1e-9 * std::max(1.0, std::abs(ta)))
      throw ConfigError(what + ": time columns disagree at row " + std::to_string(k) + " (" + format_double(ta) +
                        " vs " + format_double(tb) + ")");
  }
  return n;
}

double max_abs(const std::vector<double>& v, std::size_t n) {
  double m = 0.0;
  for (std::size_t k = 0; k < n; ++k) m = std::max(m, std::abs(v[k]));
  return m;
}

struct DiffStats {
  double max = 0.0;
  double mean = 0.0;
};

DiffStats diff_stats(const std::vector<double>& a, const std::vector<double>& b, std::size_t n) {
  DiffStats d;
  for (std::size_t k = 0; k < n; ++k) {
    const double e = std::abs(a[k] - b[k]);
    d.max = std::isnan(e) ? INFINITY : std::max(d.max, e);
    d.mean += e;
  }
  d.mean /= static_cast<double>(std::max<std::size_t>(n, 1));
  return d;
}

void compare_observables(const Table& a, const Table& b, ComparisonEntry base, double tol,
                         std::vector<ComparisonEntry>& out) {
  const std::size_t n = aligned_rows(a, b, "observables");
  if (n == 0) return;
  base.t_compared = a.rows[n - 1][0];
  base.samples = n;
  base.tolerance = tol;
  const auto xa = a.column("mean_x"), xb = b.column("mean_x");
  const auto da = a.column("dispersion"), db = b.column("dispersion");
  const auto ea = a.column("energy"), eb = b.column("energy");
  const auto na = a.column("norm"), nb = b.column("norm");
  const double width = std::max(max_abs(da, n), max_abs(db, n));
  const double x_scale = std::max({max_abs(xa, n), max_abs(xb, n), width, kTiny});
  const double e_scale = std::max({max_abs(ea, n), max_abs(eb, n), kTiny});

  const auto push = [&](const char* name, DiffStats d, double scale) {
    ComparisonEntry e = base;
    e.quantity = name;
    e.error = d.max / scale;
    e.mean_error = d.mean / scale;
    out.push_back(e);
  };
  push("mean_x", diff_stats(xa, xb, n), x_scale);
  push("dispersion", diff_stats(da, db, n), std::max(width, kTiny));
  push("energy", diff_stats(ea, eb, n), e_scale);
  push("norm", diff_stats(na, nb, n), 1.0);
}

std::vector<std::size_t> trajectory_columns(const Table& t) {
  std::vector<std::size_t> cols;
  for (std::size_t c = 0; c < t.columns.size(); ++c)
    if (t.columns[c].rfind("x_traj_", 0) == 0) cols.push_back(c);
  return cols;
}

void compare_trajectories(const Table& a, const Table& b, ComparisonEntry base, double tol,
                          std::vector<ComparisonEntry>& out) {
  const auto ca = trajectory_columns(a);
  const auto cb = trajectory_columns(b);
  if (ca.size() != cb.size()) throw ConfigError("trajectory files hold different ensemble sizes");
  const std::size_t n = aligned_rows(a, b, "trajectories");
  if (n == 0 || ca.empty()) return;
  double scale = kTiny;
  double err = 0.0;
  double sum = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    double lo = INFINITY, hi = -INFINITY;
    for (std::size_t i = 0; i < ca.size(); ++i) {
      const double xa = a.rows[k][ca[i]];
      const double xb = b.rows[k][cb[i]];
      scale = std::max({scale, std::abs(xa), std::abs(xb)});
      lo = std::min(lo, xa);
      hi = std::max(hi, xa);
      const double d = std::abs(xa - xb);
      err = std::isnan(d) ? INFINITY : std::max(err, d);
      sum += d;
    }
    scale = std::max(scale, 0.5 * (hi - lo));
  }
  base.quantity = "trajectories";
  base.t_compared = a.rows[n - 1][0];
  base.samples = n * ca.size();
  base.error = err / scale;
  base.mean_error = sum / static_cast<double>(base.samples) / scale;
  base.tolerance = tol;
  out.push_back(base);
}

double snapshot_time(const Table& t) {
  for (const auto& h : t.header)
    if (h.rfind("t=", 0) == 0) return parse_row(h.substr(2)).at(0);
  throw ConfigError("density file has no time header");
}

void compare_density(const Table& a, const Table& b, ComparisonEntry base, double tol,
                     std::vector<ComparisonEntry>& out) {
  const double ta = snapshot_time(a);
  const double tb = snapshot_time(b);
  if (std::abs(ta - tb) > 1e-9 * std::max(1.0, std::abs(ta))) throw ConfigError("density snapshots at different times");
  const auto xa = a.column("x"), xb = b.column("x");
  if (xa.size() != xb.size()) throw ConfigError("density snapshots on different grids");
  for (std::size_t j = 0; j < xa.size(); ++j)
    if (std::abs(xa[j] - xb[j]) > 1e-9 * std::max(1.0, std::abs(xa[j])))
      throw ConfigError("density snapshots on different grids");
  const auto ra = a.column("rho"), rb = b.column("rho");
  double num = 0.0, den = 0.0, abs_sum = 0.0, peak = kTiny;
  for (std::size_t j = 0; j < ra.size(); ++j) {
    num += (ra[j] - rb[j]) * (ra[j] - rb[j]);
    den += ra[j] * ra[j];
    abs_sum += std::abs(ra[j] - rb[j]);
    peak = std::max(peak, std::abs(ra[j]));
  }
  base.t_compared = ta;
  base.samples = ra.size();
  base.error = std::isnan(num) ? INFINITY : std::sqrt(num / std::max(den, kTiny));
  base.mean_error = abs_sum / static_cast<double>(std::max<std::size_t>(ra.size(), 1)) / peak;
  base.tolerance = tol;
  out.push_back(base);
}

struct FileKey {
  std::string scenario;
  int gamma_index;
  std::string quantity;
  auto operator<=>(const FileKey&) const = default;
};

}  // namespace

ComparisonReport compare_directory(const std::string& dir, const std::string& scenario, const Tolerances& tol) {
  if (!fs::is_directory(dir)) throw ConfigError("no such directory: " + dir);
  static const std::regex pattern(R"(^(.+)_g(\d+)_(closed|ode|grid)_(observables|trajectories|density_\d+)\.txt$)");
  std::map<FileKey, std::map<Engine, std::string>> groups;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const std::string name = entry.path().filename().string();
    std::smatch m;
    if (!std::regex_match(name, m, pattern)) continue;
    if (!scenario.empty() && m[1] != scenario) continue;
    groups[FileKey{m[1], std::stoi(m[2]), m[4]}][parse_engine(m[3])] = entry.path().string();
  }

  ComparisonReport report;
  for (const auto& [key, files] : groups) {
    std::vector<std::pair<Engine, Table>> tables;
    for (const auto& [engine, path] : files) tables.emplace_back(engine, read_table_file(path));
    for (std::size_t i = 0; i < tables.size(); ++i) {
      for (std::size_t j = i + 1; j < tables.size(); ++j) {
        ComparisonEntry base;
        base.scenario = key.scenario;
        base.gamma_index = key.gamma_index;
        base.engine_a = tables[i].first;
        base.engine_b = tables[j].first;
        base.quantity = key.quantity;
        const ToleranceSet& t = tol.for_pair(base.engine_a, base.engine_b);
        const Table& a = tables[i].second;
        const Table& b = tables[j].second;
        if (key.quantity == "observables") {
          compare_observables(a, b, base, t.observables, report.entries);
        } else if (key.quantity == "trajectories") {
          compare_trajectories(a, b, base, t.trajectories, report.entries);
        } else {
          compare_density(a, b, base, t.density, report.entries);
        }
      }
    }
  }
  if (report.entries.empty()) throw ConfigError("nothing to compare in " + dir);
  return report;
}

void write_report(std::ostream& os, const ComparisonReport& report) {
  os << "scenario gamma_index engines quantity t_compared samples max_error mean_error tolerance verdict\n";
  for (const auto& e : report.entries) {
    os << e.scenario << ' ' << e.gamma_index << ' ' << to_string(e.engine_a) << '/' << to_string(e.engine_b) << ' '
       << e.quantity << ' ' << format_double(e.t_compared) << ' ' << e.samples << ' ' << format_double(e.error) << ' '
       << format_double(e.mean_error) << ' ' << format_double(e.tolerance) << ' ' << (e.passed() ? "PASS" : "FAIL") << '\n';
  }
  os << "comparisons=" << report.entries.size() << " failures=" << report.failures() << '\n';
}

}  // namespace ckdyn::cli
