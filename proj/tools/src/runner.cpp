#include "ckdyn/cli/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <future>
#include <memory>
#include <mutex>
#include <optional>
#include <ostream>
#include <regex>

#include "ckdyn/bohm.hpp"
#include "ckdyn/closed_form.hpp"
#include "ckdyn/errors.hpp"
#include "ckdyn/format.hpp"
#include "ckdyn/gaussian_ode.hpp"
#include "ckdyn/grid_solver.hpp"
#include "ckdyn/observables.hpp"

namespace ckdyn::cli {

namespace fs = std::filesystem;

const char* to_string(RunState state) {
  switch (state) {
    case RunState::Ok: return "ok";
    case RunState::Truncated: return "truncated";
    case RunState::Failed: return "failed";
  }
  return "unknown";
}

namespace {

constexpr double kWidthCover = 11.0;
constexpr double kMomentumCover = 8.0;
constexpr std::size_t kMinPoints = 4096;

std::vector<double> record_times(const ScenarioConfig& cfg) {
  const auto n = std::llround(cfg.t_end / cfg.record_dt);
  std::vector<double> t(static_cast<std::size_t>(n) + 1);
  for (long long k = 0; k <= n; ++k) t[static_cast<std::size_t>(k)] = static_cast<double>(k) * cfg.record_dt;
  return t;
}

Complex initial_alpha(const PacketSpec& p, double hbar) { return {0.0, hbar / (4.0 * p.sigma0 * p.sigma0)}; }

// Closed-form parameters of packet p at time t.
ParamsFunction closed_packet(const ScenarioConfig& cfg, const PacketSpec& p, const PhysicalSetup& setup) {
  switch (cfg.kind) {
    case ScenarioKind::Free:
    case ScenarioKind::FreeSuperposition:
      return [p, setup](double t) { return free_params(t, p.x0, p.p0, p.sigma0, setup); };
    case ScenarioKind::Linear:
      return [p, setup](double t) { return linear_params(t, p.x0, p.p0, p.sigma0, setup); };
    case ScenarioKind::Harmonic:
    case ScenarioKind::HarmonicSuperposition: {
      const Complex g0 = initial_alpha(p, setup.hbar);
      return [p, g0, setup](double t) { return harmonic_params(t, p.x0, p.p0, g0, setup); };
    }
    case ScenarioKind::QuasiEigenstate:
      break;
  }
  throw ConfigError("no closed Gaussian form for this scenario");
}

ParamsFunction ode_track(GaussianParams state0, const PhysicalSetup& setup, double dt) {
  auto track = std::make_shared<OdeTrack>(state0, setup, dt);
  return [track](double t) { return track->at(t); };
}

// Gaussian packet sources of a closed or ODE run; each call builds fresh, independent tracks.
std::vector<ParamsFunction> packet_sources(const ScenarioConfig& cfg, const PhysicalSetup& setup, Engine engine) {
  std::vector<ParamsFunction> out;
  if (cfg.kind == ScenarioKind::QuasiEigenstate) {
    if (engine == Engine::Ode) out.push_back(ode_track(coherent_packet_params(0.0, 0.0, setup), setup, cfg.ode_dt));
    return out;
  }
  for (const auto& p : cfg.packets) {
    if (engine == Engine::Ode) {
      GaussianParams s0 = initial_packet(p.x0, p.p0, p.sigma0, setup);
      out.push_back(ode_track(s0, setup, cfg.ode_dt));
    } else {
      out.push_back(closed_packet(cfg, p, setup));
    }
  }
  return out;
}

double momentum_width(const GaussianParams& s, double hbar) {
  return std::sqrt(hbar * std::norm(s.alpha) / s.alpha.imag());
}

std::size_t next_pow2(double v) {
  std::size_t n = 16;
  while (static_cast<double>(n) < v) n *= 2;
  return n;
}

}  // namespace

DomainPlan plan_domain(const ScenarioConfig& cfg, double gamma) {
  const PhysicalSetup setup = cfg.setup_for(gamma);
  const auto times = record_times(cfg);
  const double margin = cfg.grid.absorbing_margin;

  std::vector<ParamsFunction> sources;
  double order_cover = 0.0;
  if (cfg.kind == ScenarioKind::QuasiEigenstate) {
    order_cover = std::sqrt(2.0 * (2.0 * cfg.eigen_n + 1.0));
    sources.push_back([setup](double t) { return coherent_packet_params(t, 0.0, setup); });
  } else {
    sources = packet_sources(cfg, setup, Engine::Closed);
  }

  double lo = INFINITY, hi = -INFINITY, p_max = 0.0;
  DomainPlan plan;
  std::optional<DomainPlan> best;
  for (double t : times) {
    try {
      for (const auto& src : sources) {
        const GaussianParams s = src(t);
        const double w = s.dispersion(setup.hbar);
        const double sp = momentum_width(s, setup.hbar);
        if (!std::isfinite(w) || !std::isfinite(sp) || !std::isfinite(s.P)) throw OverflowError("packet left the representable range");
        lo = std::min(lo, s.X - (kWidthCover + order_cover) * w);
        hi = std::max(hi, s.X + (kWidthCover + order_cover) * w);
        p_max = std::max(p_max, std::abs(s.P) + (kMomentumCover + order_cover) * sp);
      }
    } catch (const NumericalError&) {
      break;
    }
    double x_min = lo, x_max = hi;
    if (cfg.grid.x_min) {
      x_min = *cfg.grid.x_min;
      x_max = *cfg.grid.x_max;
      if (lo < x_min || hi > x_max) break;
    } else {
      const double pad = margin * (hi - lo) / (1.0 - 2.0 * margin);
      x_min = lo - pad;
      x_max = hi + pad;
    }
    const double dx_needed = setup.hbar * kPi / (kMomentumCover * p_max);
    std::size_t n = cfg.grid.n_points;
    if (n == 0) {
      n = std::max(kMinPoints, next_pow2((x_max - x_min) / dx_needed));
      if (n > cfg.grid.max_points) break;
    } else if ((x_max - x_min) / static_cast<double>(n) > dx_needed) {
      break;
    }
    plan = DomainPlan{x_min, x_max, n, t};
    best = plan;
  }
  if (!best) {
    // Not even the initial state fits; hand the grid engine the capped grid and let it report.
    plan.x_min = cfg.grid.x_min.value_or(std::isfinite(lo) ? lo : -1.0);
    plan.x_max = cfg.grid.x_max.value_or(std::isfinite(hi) ? hi : 1.0);
    plan.n_points = cfg.grid.n_points ? cfg.grid.n_points : cfg.grid.max_points;
    plan.horizon = 0.0;
    return plan;
  }
  return *best;
}

namespace {

struct RunContext {
  const ScenarioConfig& cfg;
  int gamma_index;
  PhysicalSetup setup;
  DomainPlan plan;
  std::vector<double> launch;
  Engine engine;

  std::string path(const std::string& what) const {
    return (fs::path(cfg.out_dir) / (cfg.name + "_g" + std::to_string(gamma_index) + "_" + to_string(engine) + "_" +
                                     what + ".txt"))
        .string();
  }

  std::vector<std::string> header(const std::string& what) const {
    return {"ckdyn " + what, "scenario=" + cfg.name + " kind=" + to_string(cfg.kind) +
                                 " engine=" + to_string(engine) + " gamma_index=" + std::to_string(gamma_index),
            describe(setup)};
  }

  GridConfig grid_config() const {
    GridConfig g;
    g.dt = cfg.grid.dt;
    g.n_points = plan.n_points;
    g.x_min = plan.x_min;
    g.x_max = plan.x_max;
    g.absorbing_margin = cfg.grid.absorbing_margin;
    return g;
  }
};

GridWavefunction empty_grid(const DomainPlan& plan, double t) {
  GridWavefunction w;
  w.x_min = plan.x_min;
  w.x_max = plan.x_max;
  w.psi.assign(plan.n_points, Complex{});
  w.t = t;
  return w;
}

// Unnormalized closed/ODE wave function sampled on the plan grid.
GridWavefunction sample_state(const RunContext& ctx, std::vector<ParamsFunction>& sources, double t) {
  GridWavefunction w = empty_grid(ctx.plan, t);
  if (sources.empty()) {
    for (std::size_t j = 0; j < w.size(); ++j) w.psi[j] = quasi_eigenstate(ctx.cfg.eigen_n, w.x(j), t, ctx.setup);
    return w;
  }
  std::vector<GaussianParams> states;
  for (auto& src : sources) states.push_back(src(t));
  for (std::size_t j = 0; j < w.size(); ++j)
    for (const auto& s : states) w.psi[j] += s.amplitude(w.x(j), ctx.setup.hbar);
  return w;
}

void scale(GridWavefunction& w, double factor) {
  for (auto& v : w.psi) v *= factor;
}

void write_density(const RunContext& ctx, std::size_t k, const GridWavefunction& w) {
  std::ofstream out(ctx.path("density_" + std::to_string(k)));
  if (!out) throw ConfigError("cannot write " + ctx.path("density_" + std::to_string(k)));
  write_snapshot(out, w, ctx.setup, ctx.grid_config());
}

void write_outputs(const RunContext& ctx, const ObservableSeries& obs, const std::optional<TrajectoryEnsemble>& ens) {
  {
    std::ofstream out(ctx.path("observables"));
    if (!out) throw ConfigError("cannot write " + ctx.path("observables"));
    write_observables(out, obs, ctx.header("observables"));
  }
  if (ens) {
    std::ofstream out(ctx.path("trajectories"));
    if (!out) throw ConfigError("cannot write " + ctx.path("trajectories"));
    auto header = ctx.header("trajectories");
    header.push_back("node_flagged=" + std::to_string(ens->flagged()));
    std::vector<double> centroid(obs.mean_x.begin(),
                                 obs.mean_x.begin() + static_cast<long>(std::min(obs.size(), ens->times.size())));
    write_trajectories(out, *ens, header, centroid.size() == ens->times.size() ? std::span<const double>(centroid)
                                                                               : std::span<const double>());
  }
}

TrajectoryConfig trajectory_config(const ScenarioConfig& cfg, double t_end) {
  TrajectoryConfig tc;
  tc.dt = cfg.traj_dt;
  tc.t_end = t_end;
  tc.record_stride = static_cast<int>(std::llround(cfg.record_dt / cfg.traj_dt));
  return tc;
}

RunStatus run_analytic(const RunContext& ctx) {
  const auto& cfg = ctx.cfg;
  RunStatus status;
  auto obs_sources = packet_sources(cfg, ctx.setup, ctx.engine);

  ObservableSeries obs;
  double norm0 = 0.0;
  for (double t : record_times(cfg)) {
    if (obs_sources.empty()) {
      const auto o = quasi_eigenstate_observables(cfg.eigen_n, t, ctx.setup);
      obs.push(t, o.mean_x, o.dispersion, o.energy, 1.0);
    } else if (obs_sources.size() == 1) {
      const auto o = gaussian_observables(obs_sources[0](t), ctx.setup);
      obs.push(t, o.mean_x, o.dispersion, o.energy, 1.0);
    } else {
      const auto o = superposition_observables(obs_sources[0](t), obs_sources[1](t), ctx.setup);
      if (t == 0.0) norm0 = o.norm;
      obs.push(t, o.mean_x, o.dispersion, o.energy, o.norm / norm0);
    }
  }

  auto density_sources = packet_sources(cfg, ctx.setup, ctx.engine);
  const double grid_norm0 = sample_state(ctx, density_sources, 0.0).norm();
  for (std::size_t k = 0; k < cfg.density_times.size(); ++k) {
    GridWavefunction w = sample_state(ctx, density_sources, cfg.density_times[k]);
    scale(w, 1.0 / std::sqrt(grid_norm0));
    write_density(ctx, k, w);
  }

  std::optional<TrajectoryEnsemble> ens;
  if (cfg.traj_count > 0) {
    auto field_sources = packet_sources(cfg, ctx.setup, ctx.engine);
    VelocityField field;
    if (field_sources.empty()) {
      field = quasi_eigenstate_field(ctx.setup);
    } else if (field_sources.size() == 1) {
      field = gaussian_field(field_sources[0], ctx.setup);
    } else {
      field = superposition_field(field_sources[0], field_sources[1], ctx.setup);
    }
    ens = integrate_trajectories(ctx.launch, field, trajectory_config(cfg, cfg.t_end));
  }
  write_outputs(ctx, obs, ens);
  status.t_reached = obs.times.back();
  return status;
}

RunStatus run_grid(const RunContext& ctx) {
  const auto& cfg = ctx.cfg;
  RunStatus status;
  const GridConfig gc = ctx.grid_config();
  const bool check_boundary = gc.absorbing_margin == 0.0;

  AmplitudeFunction amp;
  if (cfg.kind == ScenarioKind::QuasiEigenstate) {
    amp = [&](double x) { return quasi_eigenstate(cfg.eigen_n, x, 0.0, ctx.setup); };
  } else {
    std::vector<GaussianParams> s0;
    for (const auto& p : cfg.packets) s0.push_back(initial_packet(p.x0, p.p0, p.sigma0, ctx.setup));
    amp = [s0, hbar = ctx.setup.hbar](double x) {
      Complex v{};
      for (const auto& s : s0) v += s.amplitude(x, hbar);
      return v;
    };
  }
  GridPropagator prop(init_grid(gc, amp, 0.0), ctx.setup, gc);

  // Events in time order: observable records (kind 0) and density snapshots (kind 1).
  struct Event {
    double t;
    int kind;
    std::size_t index;
  };
  std::vector<Event> events;
  for (double t : record_times(cfg)) events.push_back({t, 0, 0});
  for (std::size_t k = 0; k < cfg.density_times.size(); ++k) events.push_back({cfg.density_times[k], 1, k});
  std::stable_sort(events.begin(), events.end(), [](const Event& a, const Event& b) { return a.t < b.t; });

  ObservableSeries obs;
  std::size_t next = 0;
  std::string failure;
  const auto advance = [&](double t) {
    try {
      while (next < events.size() && events[next].t <= t + 0.5 * gc.dt) {
        prop.advance_to(events[next].t);
        check_representable(prop.state(), ctx.setup.hbar, check_boundary);
        if (events[next].kind == 0) {
          const auto o = grid_observables(prop.state(), ctx.setup);
          obs.push(prop.time(), o.mean_x, o.dispersion, o.energy, o.norm);
        } else {
          write_density(ctx, events[next].index, prop.state());
        }
        ++next;
      }
      prop.advance_to(t);
    } catch (const ResolutionError&) {
      throw;
    } catch (const NumericalError& e) {
      failure = e.what();
      throw;
    }
  };

  std::optional<TrajectoryEnsemble> ens;
  std::optional<double> truncated_at;
  std::string reason;
  if (cfg.traj_count > 0) {
    std::vector<double> cache;
    long long cached_step = -1;
    VelocityField field = [&](double t, std::span<const double> x, std::span<double> v) {
      advance(t);
      const long long step = std::llround(prop.time() / gc.dt);
      if (step != cached_step) {
        cache = grid_velocity(prop.state(), ctx.setup);
        cached_step = step;
      }
      const auto& st = prop.state();
      for (std::size_t i = 0; i < x.size(); ++i) v[i] = interpolate_cubic(st.x_min, st.dx(), cache, x[i]);
    };
    TrajectoryConfig tc = trajectory_config(cfg, cfg.t_end);
    tc.bounds = std::make_pair(gc.x_min, gc.x_max);
    tc.stop_on_error = true;
    ens = integrate_trajectories(ctx.launch, field, tc);
    if (!failure.empty()) throw InstabilityError(failure);
    if (ens->truncated_at) {
      truncated_at = ens->truncated_at;
      reason = ens->truncation_reason;
    }
  }
  if (!truncated_at) {
    try {
      advance(cfg.t_end);
    } catch (const ResolutionError& e) {
      truncated_at = e.time();
      reason = e.what();
    }
    if (!failure.empty()) throw InstabilityError(failure);
  }
  write_outputs(ctx, obs, ens);
  status.t_reached = obs.times.empty() ? 0.0 : obs.times.back();
  if (truncated_at) {
    status.state = RunState::Truncated;
    status.detail = "grid horizon at t=" + format_double(*truncated_at) + ": " + reason;
  }
  return status;
}

RunStatus run_one(const RunContext& ctx) {
  const auto start = std::chrono::steady_clock::now();
  RunStatus status;
  try {
    status = ctx.engine == Engine::Grid ? run_grid(ctx) : run_analytic(ctx);
  } catch (const NumericalError& e) {
    status.state = RunState::Failed;
    status.detail = e.what();
  } catch (const DomainError& e) {
    status.state = RunState::Failed;
    status.detail = e.what();
  }
  status.gamma_index = ctx.gamma_index;
  status.gamma = ctx.setup.gamma;
  status.engine = ctx.engine;
  status.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return status;
}

std::vector<double> launch_positions(const ScenarioConfig& cfg, const PhysicalSetup& setup, const DomainPlan& plan) {
  if (cfg.traj_count == 0) return {};
  if (cfg.kind != ScenarioKind::QuasiEigenstate && cfg.packets.size() == 1) {
    const auto& p = cfg.packets[0];
    return sample_initial_positions(initial_packet(p.x0, p.p0, p.sigma0, setup), setup.hbar, cfg.traj_count,
                                    cfg.sampling, cfg.seed);
  }
  GridWavefunction w = empty_grid(plan, 0.0);
  for (std::size_t j = 0; j < w.size(); ++j) {
    if (cfg.kind == ScenarioKind::QuasiEigenstate) {
      w.psi[j] = quasi_eigenstate(cfg.eigen_n, w.x(j), 0.0, setup);
    } else {
      for (const auto& p : cfg.packets) w.psi[j] += initial_packet(p.x0, p.p0, p.sigma0, setup).amplitude(w.x(j), setup.hbar);
    }
  }
  const auto xs = w.positions();
  const auto rho = w.density();
  return sample_from_density(xs, rho, cfg.traj_count, cfg.sampling, cfg.seed);
}

void remove_stale_outputs(const ScenarioConfig& cfg) {
  const std::regex pattern("^" + std::regex_replace(cfg.name, std::regex(R"([.^$|()\[\]{}*+?\\])"), R"(\$&)") +
                           R"(_g\d+_(closed|ode|grid)_.*\.txt$)");
  for (const auto& entry : fs::directory_iterator(cfg.out_dir))
    if (entry.is_regular_file() && std::regex_match(entry.path().filename().string(), pattern)) fs::remove(entry.path());
}

void write_runs(std::ostream& os, const RunResult& result) {
  os << "gamma_index gamma engine state t_reached detail\n";
  for (const auto& r : result.runs)
    os << r.gamma_index << ' ' << format_double(r.gamma) << ' ' << to_string(r.engine) << ' ' << to_string(r.state)
       << ' ' << format_double(r.t_reached) << ' ' << (r.detail.empty() ? "-" : r.detail) << '\n';
}

}  // namespace

RunResult run_scenario(const ScenarioConfig& cfg, const Tolerances& tol, std::ostream* log) {
  validate(cfg);
  std::error_code ec;
  fs::create_directories(cfg.out_dir, ec);
  if (ec || !fs::is_directory(cfg.out_dir)) throw ConfigError("cannot create output directory " + cfg.out_dir);
  remove_stale_outputs(cfg);
  {
    std::ofstream out(fs::path(cfg.out_dir) / (cfg.name + "_config.ini"));
    write_config(out, cfg);
  }

  RunResult result;
  std::vector<std::vector<double>> launches;
  for (std::size_t g = 0; g < cfg.gammas.size(); ++g) {
    const PhysicalSetup setup = cfg.setup_for(cfg.gammas[g]);
    validate(setup);
    result.plans.push_back(plan_domain(cfg, cfg.gammas[g]));
    launches.push_back(launch_positions(cfg, setup, result.plans.back()));
  }

  std::mutex log_mutex;
  std::vector<std::future<RunStatus>> futures;
  for (std::size_t g = 0; g < cfg.gammas.size(); ++g) {
    for (Engine engine : cfg.engines) {
      RunContext ctx{cfg, static_cast<int>(g), cfg.setup_for(cfg.gammas[g]), result.plans[g], launches[g], engine};
      futures.push_back(std::async(std::launch::async, [ctx, log, &log_mutex] {
        RunStatus s = run_one(ctx);
        if (log) {
          std::lock_guard lock(log_mutex);
          *log << ctx.cfg.name << " g" << ctx.gamma_index << ' ' << to_string(ctx.engine) << ' ' << to_string(s.state) << " t=" << format_double(s.t_reached)
               << (s.detail.empty() ? "" : " (" + s.detail + ")") << '\n';
        }
        return s;
      }));
    }
  }
  for (auto& f : futures) result.runs.push_back(f.get());

  bool failed = false;
  for (const auto& r : result.runs) failed = failed || r.state == RunState::Failed;

  std::string compare_error;
  if (cfg.engines.size() > 1) {
    try {
      result.comparison = compare_directory(cfg.out_dir, cfg.name, tol);
      result.compared = true;
    } catch (const ConfigError& e) {
      compare_error = e.what();
    }
  }

  if (failed) {
    result.exit_code = kExitNumerical;
  } else if (!compare_error.empty()) {
    result.exit_code = kExitConfig;
  } else if (result.compared && !result.comparison.passed()) {
    result.exit_code = kExitTolerance;
  }

  {
    std::ofstream out(fs::path(cfg.out_dir) / (cfg.name + "_runs.txt"));
    write_runs(out, result);
  }
  {
    std::ofstream out(fs::path(cfg.out_dir) / (cfg.name + "_timing.txt"));
    out << "gamma_index engine seconds\n";
    for (const auto& r : result.runs)
      out << r.gamma_index << ' ' << to_string(r.engine) << ' ' << format_double(r.seconds) << '\n';
  }
  {
    std::ofstream out(fs::path(cfg.out_dir) / (cfg.name + "_report.txt"));
    out << "scenario " << cfg.name << " kind=" << to_string(cfg.kind) << '\n';
    out << "\n[grids]\ngamma_index gamma x_min x_max n_points planned_horizon\n";
    for (std::size_t g = 0; g < result.plans.size(); ++g) {
      const auto& p = result.plans[g];
      out << g << ' ' << format_double(cfg.gammas[g]) << ' ' << format_double(p.x_min) << ' ' << format_double(p.x_max)
          << ' ' << p.n_points << ' ' << format_double(p.horizon) << '\n';
    }
    out << "\n[runs]\n";
    write_runs(out, result);
    out << "\n[comparison]\n";
    if (result.compared) {
      write_report(out, result.comparison);
    } else if (!compare_error.empty()) {
      out << "error: " << compare_error << '\n';
    } else {
      out << "single engine, nothing compared\n";
    }
    out << "\nexit_code=" << result.exit_code << '\n';
  }
  return result;
}

}  // namespace ckdyn::cli
