#include "ckdyn/grid_solver.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "ckdyn/errors.hpp"
#include "ckdyn/format.hpp"

namespace ckdyn {

std::vector<double> GridWavefunction::positions() const {
  std::vector<double> xs(size());
  for (std::size_t j = 0; j < xs.size(); ++j) xs[j] = x(j);
  return xs;
}

std::vector<double> GridWavefunction::density() const {
  std::vector<double> rho(size());
  for (std::size_t j = 0; j < rho.size(); ++j) rho[j] = std::norm(psi[j]);
  return rho;
}

double GridWavefunction::norm() const {
  double sum = 0.0;
  for (const auto& v : psi) sum += std::norm(v);
  return sum * dx();
}

void validate(const GridConfig& cfg) {
  if (!(cfg.dt > 0.0) || !std::isfinite(cfg.dt)) throw ConfigError("grid dt must be positive");
  if (cfg.n_points < 16) throw ConfigError("grid needs at least 16 points");
  if (!(cfg.x_max > cfg.x_min)) throw ConfigError("grid x_max must exceed x_min");
  if (!(cfg.absorbing_margin >= 0.0 && cfg.absorbing_margin < 0.5))
    throw ConfigError("absorbing margin must lie in [0, 0.5)");
}

std::vector<double> wavenumbers(std::size_t n, double dx) {
  std::vector<double> k(n);
  const double dk = 2.0 * kPi / (static_cast<double>(n) * dx);
  const auto half = static_cast<long long>(n / 2);
  for (std::size_t j = 0; j < n; ++j) {
    auto m = static_cast<long long>(j);
    if (m >= half) m -= static_cast<long long>(n);
    k[j] = dk * static_cast<double>(m);
  }
  return k;
}

std::vector<Complex> spectral_derivative(std::span<const Complex> values, double dx, int order) {
  const std::size_t n = values.size();
  std::vector<Complex> buf(values.begin(), values.end());
  Fft fft(n);
  fft.forward(buf);
  const auto k = wavenumbers(n, dx);
  const Complex ik_unit(0.0, 1.0);
  for (std::size_t j = 0; j < n; ++j) {
    if (n % 2 == 0 && j == n / 2) {
      buf[j] = 0.0;
      continue;
    }
    buf[j] *= std::pow(ik_unit * k[j], order) / static_cast<double>(n);
  }
  fft.backward(buf);
  return buf;
}

double boundary_ratio(const GridWavefunction& state) {
  double peak = 0.0;
  for (const auto& v : state.psi) peak = std::max(peak, std::abs(v));
  if (peak == 0.0) return 0.0;
  return std::max(std::abs(state.psi.front()), std::abs(state.psi.back())) / peak;
}

double resolved_momentum(const GridWavefunction& state, double hbar) { return hbar * kPi / (8.0 * state.dx()); }

double momentum_tail_fraction(const GridWavefunction& state, double p_cut, double hbar) {
  std::vector<Complex> buf = state.psi;
  Fft(buf.size()).forward(buf);
  const auto k = wavenumbers(buf.size(), state.dx());
  double total = 0.0;
  double tail = 0.0;
  for (std::size_t j = 0; j < buf.size(); ++j) {
    const double w = std::norm(buf[j]);
    total += w;
    if (std::abs(hbar * k[j]) > p_cut) tail += w;
  }
  return total > 0.0 ? tail / total : 0.0;
}

void check_representable(const GridWavefunction& state, double hbar, bool check_boundary) {
  if (check_boundary && boundary_ratio(state) >= kBoundaryTolerance)
    throw ResolutionError("wave function reaches the grid boundary", state.t);
  if (momentum_tail_fraction(state, resolved_momentum(state, hbar), hbar) > kResolutionTolerance)
    throw ResolutionError("grid spacing does not resolve the momentum content", state.t);
}

GridWavefunction init_grid(const GridConfig& cfg, const AmplitudeFunction& initial, double t0) {
  validate(cfg);
  GridWavefunction state;
  state.x_min = cfg.x_min;
  state.x_max = cfg.x_max;
  state.t = t0;
  state.psi.resize(cfg.n_points);
  for (std::size_t j = 0; j < cfg.n_points; ++j) state.psi[j] = initial(state.x(j));
  const double n = state.norm();
  if (!(n > 0.0) || !std::isfinite(n)) throw DomainError("initial wave function has zero or non-finite norm");
  const double scale = 1.0 / std::sqrt(n);
  for (auto& v : state.psi) v *= scale;
  check_representable(state, 1.0, cfg.absorbing_margin == 0.0);
  return state;
}

SplitStepper::SplitStepper(const PhysicalSetup& setup, std::size_t n, double x_min, double x_max)
    : setup_(setup), fft_(n), k2_(n), potential_(n), has_potential_(!is_free(setup)) {
  validate(setup);
  const double dx = (x_max - x_min) / static_cast<double>(n);
  const auto k = wavenumbers(n, dx);
  for (std::size_t j = 0; j < n; ++j) {
    k2_[j] = k[j] * k[j];
    potential_[j] = potential_eval(setup.potential, setup.mass, x_min + static_cast<double>(j) * dx).value;
  }
}

void SplitStepper::step(GridWavefunction& state, double dt) const {
  const std::size_t n = state.size();
  if (n != k2_.size()) throw DomainError("grid size does not match the stepper");
  const double m = setup_.mass;
  const double hbar = setup_.hbar;
  const double t_mid = state.t + 0.5 * dt;
  const double grow = std::exp(setup_.gamma * t_mid);
  const double shrink = 1.0 / grow;
  const double norm_before = state.norm();

  const auto half_potential = [&] {
    if (!has_potential_) return;
    const double c = -0.5 * dt * grow / hbar;
    for (std::size_t j = 0; j < n; ++j) state.psi[j] *= std::polar(1.0, c * potential_[j]);
  };

  half_potential();
  fft_.forward(state.psi);
  const double ck = -hbar * shrink * dt / (2.0 * m);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t j = 0; j < n; ++j) state.psi[j] *= std::polar(inv_n, ck * k2_[j]);
  fft_.backward(state.psi);
  half_potential();
  state.t += dt;

  const double norm_after = state.norm();
  if (!std::isfinite(norm_after) || std::abs(norm_after - norm_before) > 1e-8 * norm_before)
    throw InstabilityError("split-step norm drift exceeds 1e-8 at t=" + format_double(state.t));
}

GridWavefunction split_step(const GridWavefunction& state, const PhysicalSetup& setup, double dt) {
  if (!(dt > 0.0)) throw DomainError("split-step dt must be positive");
  SplitStepper stepper(setup, state.size(), state.x_min, state.x_max);
  GridWavefunction next = state;
  stepper.step(next, dt);
  return next;
}

GridPropagator::GridPropagator(GridWavefunction state0, const PhysicalSetup& setup, const GridConfig& cfg)
    : state_(std::move(state0)),
      setup_(setup),
      cfg_(cfg),
      stepper_(setup, state_.size(), state_.x_min, state_.x_max),
      t0_(state_.t) {
  validate(cfg);
  if (cfg.absorbing_margin > 0.0) {
    const std::size_t n = state_.size();
    mask_.assign(n, 1.0);
    const double width = cfg.absorbing_margin * (state_.x_max - state_.x_min);
    for (std::size_t j = 0; j < n; ++j) {
      const double x = state_.x(j);
      const double depth = std::max(state_.x_min + width - x, x - (state_.x_max - width));
      if (depth > 0.0) mask_[j] = std::pow(std::cos(0.5 * kPi * std::min(depth / width, 1.0)), 0.125);
    }
  }
}

void GridPropagator::step() {
  stepper_.step(state_, cfg_.dt);
  ++steps_;
  state_.t = t0_ + static_cast<double>(steps_) * cfg_.dt;
  if (!mask_.empty())
    for (std::size_t j = 0; j < mask_.size(); ++j) state_.psi[j] *= mask_[j];
}

void GridPropagator::advance_to(double t) {
  const auto target = std::llround((t - t0_) / cfg_.dt);
  if (target < steps_) throw DomainError("grid propagator cannot move backwards in time");
  while (steps_ < target) step();
}

std::vector<GridWavefunction> propagate_grid(const GridWavefunction& state0, const PhysicalSetup& setup,
                                             const GridConfig& cfg, double t_end,
                                             std::span<const double> record_times) {
  if (!std::is_sorted(record_times.begin(), record_times.end()))
    throw ConfigError("record times must be sorted");
  if (!record_times.empty() && (record_times.front() < state0.t || record_times.back() > t_end + 0.5 * cfg.dt))
    throw ConfigError("record times must lie within the propagation window");
  GridPropagator prop(state0, setup, cfg);
  std::vector<GridWavefunction> out;
  out.reserve(record_times.size());
  const bool check_boundary = cfg.absorbing_margin == 0.0;
  for (double t : record_times) {
    prop.advance_to(t);
    check_representable(prop.state(), setup.hbar, check_boundary);
    out.push_back(prop.state());
  }
  return out;
}

void write_snapshot(std::ostream& os, const GridWavefunction& state, const PhysicalSetup& setup,
                    const GridConfig& cfg) {
  Table table;
  table.header = {
      "ckdyn grid snapshot",
      "t=" + format_double(state.t),
      describe(setup),
      "n_points=" + std::to_string(state.size()) + " x_min=" + format_double(state.x_min) +
          " x_max=" + format_double(state.x_max) + " dt=" + format_double(cfg.dt) +
          " absorbing_margin=" + format_double(cfg.absorbing_margin),
  };
  table.columns = {"x", "re_psi", "im_psi", "rho"};
  table.rows.reserve(state.size());
  for (std::size_t j = 0; j < state.size(); ++j)
    table.rows.push_back({state.x(j), state.psi[j].real(), state.psi[j].imag(), std::norm(state.psi[j])});
  write_table(os, table);
}

}  // namespace ckdyn
