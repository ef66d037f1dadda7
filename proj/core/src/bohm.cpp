#include "ckdyn/bohm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <ostream>
#include <random>

#include <boost/math/distributions/normal.hpp>

#include "ckdyn/closed_form.hpp"
#include "ckdyn/errors.hpp"
#include "ckdyn/format.hpp"

namespace ckdyn {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

}  // namespace

std::vector<double> quantile_positions(std::size_t n, double x0, double sigma0) {
  if (!(sigma0 > 0.0)) throw DomainError("sigma0 must be positive");
  const boost::math::normal_distribution<double> dist(x0, sigma0);
  std::vector<double> xs(n);
  for (std::size_t i = 0; i < n; ++i)
    xs[i] = boost::math::quantile(dist, (static_cast<double>(i) + 0.5) / static_cast<double>(n));
  return xs;
}

std::vector<double> random_positions(std::size_t n, double x0, double sigma0, std::uint64_t seed) {
  if (!(sigma0 > 0.0)) throw DomainError("sigma0 must be positive");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(x0, sigma0);
  std::vector<double> xs(n);
  for (auto& x : xs) x = dist(rng);
  std::sort(xs.begin(), xs.end());
  return xs;
}

std::vector<double> sample_from_density(std::span<const double> xs, std::span<const double> rho, std::size_t n,
                                        SamplingMode mode, std::uint64_t seed) {
  if (xs.size() != rho.size() || xs.size() < 2) throw DomainError("density samples must match positions");
  std::vector<double> cdf(xs.size(), 0.0);
  for (std::size_t j = 1; j < xs.size(); ++j) cdf[j] = cdf[j - 1] + 0.5 * (rho[j] + rho[j - 1]) * (xs[j] - xs[j - 1]);
  const double total = cdf.back();
  if (!(total > 0.0) || !std::isfinite(total)) throw DomainError("density has zero or non-finite mass");

  std::vector<double> u(n);
  if (mode == SamplingMode::Quantile) {
    for (std::size_t i = 0; i < n; ++i) u[i] = (static_cast<double>(i) + 0.5) / static_cast<double>(n);
  } else {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(0.0, 1.0);
    for (auto& v : u) v = dist(rng);
    std::sort(u.begin(), u.end());
  }

  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double target = u[i] * total;
    auto it = std::lower_bound(cdf.begin(), cdf.end(), target);
    if (it == cdf.begin()) ++it;
    if (it == cdf.end()) --it;
    const auto j = static_cast<std::size_t>(it - cdf.begin());
    const double lo = cdf[j - 1];
    const double hi = cdf[j];
    const double w = hi > lo ? (target - lo) / (hi - lo) : 0.5;
    out[i] = xs[j - 1] + w * (xs[j] - xs[j - 1]);
  }
  return out;
}

std::vector<double> sample_initial_positions(const GaussianParams& state, double hbar, std::size_t n,
                                             SamplingMode mode, std::uint64_t seed) {
  const double sigma = state.dispersion(hbar);
  if (mode == SamplingMode::Quantile) return quantile_positions(n, state.X, sigma);
  return random_positions(n, state.X, sigma, seed);
}

double velocity_gaussian(const GaussianParams& state, double x, const PhysicalSetup& setup) {
  return std::exp(-setup.gamma * state.t) * (2.0 * state.alpha.real() * (x - state.X) + state.P) / setup.mass;
}

namespace {

struct ScaledPair {
  Complex u_a;
  Complex u_b;
  Complex k_a;
  Complex k_b;
};

// psi_i = exp(l_i) with l_i = (i/hbar)[alpha (x-X)^2 + P (x-X) + f]; both rescaled by the larger modulus.
ScaledPair scaled_pair(const GaussianParams& a, const GaussianParams& b, double x, double hbar) {
  const Complex i_over_hbar(0.0, 1.0 / hbar);
  const double da = x - a.X;
  const double db = x - b.X;
  const Complex la = i_over_hbar * (a.alpha * da * da + a.P * da + a.f);
  const Complex lb = i_over_hbar * (b.alpha * db * db + b.P * db + b.f);
  const double shift = std::max(la.real(), lb.real());
  return {std::exp(la - shift), std::exp(lb - shift), i_over_hbar * (2.0 * a.alpha * da + a.P),
          i_over_hbar * (2.0 * b.alpha * db + b.P)};
}

}  // namespace

double velocity_superposition(const GaussianParams& a, const GaussianParams& b, double x,
                              const PhysicalSetup& setup) {
  const auto s = scaled_pair(a, b, x, setup.hbar);
  const Complex psi = s.u_a + s.u_b;
  const Complex dpsi = s.u_a * s.k_a + s.u_b * s.k_b;
  const double rho = std::norm(psi);
  if (!(rho > kNodeDensityFloor * (std::norm(s.u_a) + std::norm(s.u_b)))) return kNaN;
  const double t = a.t;
  return std::exp(-setup.gamma * t) * setup.hbar / setup.mass * (std::conj(psi) * dpsi).imag() / rho;
}

double density_superposition(const GaussianParams& a, const GaussianParams& b, double x, double hbar) {
  const double da = x - a.X;
  const double db = x - b.X;
  const Complex i_over_hbar(0.0, 1.0 / hbar);
  return std::norm(std::exp(i_over_hbar * (a.alpha * da * da + a.P * da + a.f)) +
                   std::exp(i_over_hbar * (b.alpha * db * db + b.P * db + b.f)));
}

VelocityField gaussian_field(ParamsFunction params, const PhysicalSetup& setup) {
  return [params = std::move(params), setup](double t, std::span<const double> x, std::span<double> v) {
    const GaussianParams s = params(t);
    for (std::size_t i = 0; i < x.size(); ++i) v[i] = velocity_gaussian(s, x[i], setup);
  };
}

VelocityField superposition_field(ParamsFunction a, ParamsFunction b, const PhysicalSetup& setup) {
  return [a = std::move(a), b = std::move(b), setup](double t, std::span<const double> x, std::span<double> v) {
    const GaussianParams sa = a(t);
    const GaussianParams sb = b(t);
    for (std::size_t i = 0; i < x.size(); ++i) v[i] = velocity_superposition(sa, sb, x[i], setup);
  };
}

VelocityField quasi_eigenstate_field(const PhysicalSetup& setup) {
  const double rate = -0.5 * setup.gamma;
  return [rate](double, std::span<const double> x, std::span<double> v) {
    for (std::size_t i = 0; i < x.size(); ++i) v[i] = rate * x[i];
  };
}

std::vector<double> grid_velocity(const GridWavefunction& state, const PhysicalSetup& setup) {
  const auto dpsi = spectral_derivative(state.psi, state.dx());
  double peak = 0.0;
  for (const auto& v : state.psi) peak = std::max(peak, std::norm(v));
  const double scale = std::exp(-setup.gamma * state.t) * setup.hbar / setup.mass;
  std::vector<double> vel(state.size());
  for (std::size_t j = 0; j < vel.size(); ++j) {
    const double rho = std::norm(state.psi[j]);
    vel[j] = rho > kNodeDensityFloor * peak ? scale * (std::conj(state.psi[j]) * dpsi[j]).imag() / rho : kNaN;
  }
  return vel;
}

double interpolate_cubic(double x_min, double dx, std::span<const double> values, double x) {
  const auto n = static_cast<long long>(values.size());
  if (n < 4) throw DomainError("cubic interpolation needs at least four samples");
  const double s = (x - x_min) / dx;
  auto j = static_cast<long long>(std::floor(s)) - 1;
  j = std::clamp(j, 0LL, n - 4);
  const double u = s - static_cast<double>(j);
  const double y0 = values[static_cast<std::size_t>(j)];
  const double y1 = values[static_cast<std::size_t>(j + 1)];
  const double y2 = values[static_cast<std::size_t>(j + 2)];
  const double y3 = values[static_cast<std::size_t>(j + 3)];
  // Lagrange basis on nodes 0, 1, 2, 3.
  const double l0 = -(u - 1.0) * (u - 2.0) * (u - 3.0) / 6.0;
  const double l1 = u * (u - 2.0) * (u - 3.0) / 2.0;
  const double l2 = -u * (u - 1.0) * (u - 3.0) / 2.0;
  const double l3 = u * (u - 1.0) * (u - 2.0) / 6.0;
  return l0 * y0 + l1 * y1 + l2 * y2 + l3 * y3;
}

VelocityField grid_field(GridPropagator& prop) {
  struct Cache {
    double t = kNaN;
    std::vector<double> v;
  };
  auto cache = std::make_shared<Cache>();
  return [&prop, cache](double t, std::span<const double> x, std::span<double> v) {
    if (!(cache->t == t)) {
      prop.advance_to(t);
      const double lag = std::abs(prop.time() - t);
      if (lag > 1e-9 * std::max(1.0, std::abs(t)))
        throw DomainError("grid velocity requested between grid steps at t=" + format_double(t));
      check_representable(prop.state(), prop.setup().hbar, prop.config().absorbing_margin == 0.0);
      cache->v = grid_velocity(prop.state(), prop.setup());
      cache->t = t;
    }
    const auto& st = prop.state();
    for (std::size_t i = 0; i < x.size(); ++i) v[i] = interpolate_cubic(st.x_min, st.dx(), cache->v, x[i]);
  };
}

void validate(const TrajectoryConfig& cfg) {
  if (!(cfg.dt > 0.0) || !std::isfinite(cfg.dt)) throw ConfigError("trajectory dt must be positive");
  if (!(cfg.t_end >= 0.0)) throw ConfigError("trajectory t_end must be non-negative");
  if (cfg.record_stride < 1) throw ConfigError("record stride must be at least 1");
  if (cfg.bounds && !(cfg.bounds->second > cfg.bounds->first)) throw ConfigError("empty trajectory bounds");
}

std::vector<double> TrajectoryEnsemble::trajectory(std::size_t i) const {
  std::vector<double> out(positions.size());
  for (std::size_t k = 0; k < positions.size(); ++k) out[k] = positions[k][i];
  return out;
}

std::size_t TrajectoryEnsemble::flagged() const {
  return static_cast<std::size_t>(std::count(node_flag.begin(), node_flag.end(), std::uint8_t{1}));
}

TrajectoryEnsemble integrate_trajectories(std::span<const double> initial, const VelocityField& field,
                                          const TrajectoryConfig& cfg) {
  validate(cfg);
  const std::size_t n = initial.size();
  TrajectoryEnsemble out;
  out.launch.assign(initial.begin(), initial.end());
  out.node_flag.assign(n, 0);
  std::vector<double> x(initial.begin(), initial.end());
  std::vector<double> last_v(n, 0.0);
  std::vector<double> k1(n), k2(n), k3(n), k4(n), tmp(n);

  const auto eval = [&](double t, const std::vector<double>& pos, std::vector<double>& k) {
    field(t, pos, k);
    for (std::size_t i = 0; i < n; ++i) {
      if (std::isfinite(k[i])) {
        last_v[i] = k[i];
      } else {
        k[i] = last_v[i];
        out.node_flag[i] = 1;
      }
    }
  };
  const auto check_bounds = [&](double t) {
    if (!cfg.bounds) return;
    for (std::size_t i = 0; i < n; ++i)
      if (!(x[i] >= cfg.bounds->first && x[i] <= cfg.bounds->second))
        throw TruncationError("trajectory " + std::to_string(i) + " left the domain at t=" + format_double(t), t, i);
  };

  const auto n_steps = static_cast<long long>(std::floor(cfg.t_end / cfg.dt + 1e-9));
  const double h = cfg.dt;
  out.times.push_back(0.0);
  out.positions.push_back(x);
  check_bounds(0.0);
  long long k = 0;
  try {
    for (; k < n_steps; ++k) {
      const double t = static_cast<double>(k) * h;
      eval(t, x, k1);
      for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + 0.5 * h * k1[i];
      eval(t + 0.5 * h, tmp, k2);
      for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + 0.5 * h * k2[i];
      eval(t + 0.5 * h, tmp, k3);
      for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + h * k3[i];
      eval(t + h, tmp, k4);
      for (std::size_t i = 0; i < n; ++i) x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
      const double t_next = static_cast<double>(k + 1) * h;
      check_bounds(t_next);
      if ((k + 1) % cfg.record_stride == 0) {
        out.times.push_back(t_next);
        out.positions.push_back(x);
      }
    }
  } catch (const TruncationError& e) {
    if (!cfg.stop_on_error) throw;
    out.truncated_at = e.exit_time();
    out.truncation_reason = e.what();
  } catch (const ResolutionError& e) {
    if (!cfg.stop_on_error) throw;
    out.truncated_at = e.time();
    out.truncation_reason = e.what();
  } catch (const NumericalError& e) {
    if (!cfg.stop_on_error) throw;
    out.truncated_at = static_cast<double>(k) * h;
    out.truncation_reason = e.what();
  }
  return out;
}

void write_trajectories(std::ostream& os, const TrajectoryEnsemble& ensemble,
                        const std::vector<std::string>& header, std::span<const double> centroid) {
  if (!centroid.empty() && centroid.size() != ensemble.times.size())
    throw DomainError("centroid column must have one value per recorded time");
  Table table;
  table.header = header;
  table.columns.push_back("t");
  for (std::size_t i = 0; i < ensemble.size(); ++i) table.columns.push_back("x_traj_" + std::to_string(i));
  if (!centroid.empty()) table.columns.push_back("x_centroid");
  for (std::size_t k = 0; k < ensemble.times.size(); ++k) {
    std::vector<double> row;
    row.reserve(ensemble.size() + 1);
    row.push_back(ensemble.times[k]);
    row.insert(row.end(), ensemble.positions[k].begin(), ensemble.positions[k].end());
    if (!centroid.empty()) row.push_back(centroid[k]);
    table.rows.push_back(std::move(row));
  }
  write_table(os, table);
}

double coalescence_rate(const PhysicalSetup& setup) {
  harmonic_omega0(setup);
  const auto regime = classify_regime(setup);
  if (regime.kind == Regime::Overdamped) return 0.5 * setup.gamma - regime.rate;
  return 0.5 * setup.gamma;
}

double analytic_trajectory(const AnalyticScenario& scenario, const PhysicalSetup& setup, double x_launch, double t) {
  switch (scenario.law) {
    case TrajectoryLaw::Gaussian: {
      if (is_harmonic(setup)) throw DomainError("the Gaussian trajectory law covers free and linear potentials");
      const auto sol = free_solution(t, scenario.x0, scenario.p0, scenario.sigma0, setup);
      const double centre = is_linear(setup) ? linear_solution(t, scenario.x0, scenario.p0, setup).x : sol.x_t;
      return centre + sol.sigma_t / scenario.sigma0 * (x_launch - scenario.x0);
    }
    case TrajectoryLaw::QuasiEigenstate: {
      const double w0 = harmonic_omega0(setup);
      if (!(w0 > 0.5 * setup.gamma)) throw DomainError("quasi-eigenstates need omega0 > gamma/2");
      return x_launch * std::exp(-0.5 * setup.gamma * t);
    }
    case TrajectoryLaw::StationaryShape: {
      const auto regime = classify_regime(setup);
      const auto c = harmonic_centroid(t, scenario.x0, scenario.p0, regime, setup);
      return c.x + (x_launch - scenario.x0) * std::exp(-coalescence_rate(setup) * t);
    }
  }
  throw DomainError("unsupported trajectory law");
}

}  // namespace ckdyn
