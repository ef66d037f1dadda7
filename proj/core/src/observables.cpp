#include "ckdyn/observables.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "ckdyn/bohm.hpp"
#include "ckdyn/closed_form.hpp"
#include "ckdyn/errors.hpp"
#include "ckdyn/format.hpp"

namespace ckdyn {

GaussianObservables gaussian_observables(const GaussianParams& state, const PhysicalSetup& setup) {
  const double im = state.alpha.imag();
  if (!(im > 0.0)) throw NonNormalizableError("Im alpha must be positive for finite observables");
  const double m = setup.mass;
  const double hbar = setup.hbar;
  const double shrink = std::exp(-setup.gamma * state.t);
  const double p = state.P * shrink;
  const auto pot = potential_eval(setup.potential, m, state.X);
  const double energy = p * p / (2.0 * m) + pot.value +
                        hbar / (2.0 * m) * std::norm(state.alpha) / im * shrink * shrink +
                        hbar * pot.second / (8.0 * im);
  return {state.X, std::sqrt(hbar / (4.0 * im)), energy};
}

double linear_energy(double t, double x0, double p0, double sigma0, const PhysicalSetup& setup) {
  if (!(sigma0 > 0.0)) throw DomainError("sigma0 must be positive");
  const double a = linear_slope(setup);
  const double m = setup.mass;
  const double hbar = setup.hbar;
  const auto c = linear_solution(t, x0, p0, setup);
  const double spread = hbar * hbar / (8.0 * m * sigma0 * sigma0) * std::exp(-2.0 * setup.gamma * t);
  return c.p * c.p / (2.0 * m) - m * a * c.x + spread;
}

double linear_energy_asymptote(double t, double x0, double p0, const PhysicalSetup& setup) {
  const double a = linear_slope(setup);
  const double g = setup.gamma;
  if (!(g > 0.0)) throw DomainError("the asymptotic energy law needs gamma > 0");
  const double m = setup.mass;
  return -m * a * x0 - p0 * a / g + m * a * a / (2.0 * g * g) * (3.0 - 2.0 * g * t);
}

double linear_energy_slope(const PhysicalSetup& setup) {
  const double a = linear_slope(setup);
  if (!(setup.gamma > 0.0)) throw DomainError("the asymptotic energy slope needs gamma > 0");
  return -setup.mass * a * a / setup.gamma;
}

double harmonic_energy(double t, double x0, const PhysicalSetup& setup) {
  const double w0 = harmonic_omega0(setup);
  const auto regime = classify_regime(setup);
  if (regime.kind != Regime::Underdamped)
    throw DomainError("harmonic energy law needs underdamped friction");
  const double ratio = w0 / regime.rate;
  const double decay = std::exp(-setup.gamma * t);
  const double swing = 1.0 + setup.gamma / (2.0 * w0) * std::sin(2.0 * regime.rate * t - regime.phase);
  return 0.5 * setup.mass * w0 * w0 * x0 * x0 * ratio * ratio * swing * decay +
         0.5 * setup.hbar * w0 * ratio * decay;
}

double quantum_potential(double sqrt_rho, double d2_sqrt_rho, double t, const PhysicalSetup& setup) {
  return -setup.hbar * setup.hbar / (2.0 * setup.mass) * std::exp(-setup.gamma * t) * d2_sqrt_rho / sqrt_rho;
}

double quantum_potential_rho(double rho, double drho, double d2rho, double t, const PhysicalSetup& setup) {
  return -setup.hbar * setup.hbar / (4.0 * setup.mass) * std::exp(-setup.gamma * t) *
         (d2rho / rho - drho * drho / (2.0 * rho * rho));
}

double quantum_potential_gaussian(double x, double xc, double sigma, double t, const PhysicalSetup& setup) {
  const double u = (x - xc) / sigma;
  return setup.hbar * setup.hbar * std::exp(-setup.gamma * t) / (4.0 * setup.mass * sigma * sigma) *
         (1.0 - 0.5 * u * u);
}

std::vector<double> quantum_potential(const GridWavefunction& state, const PhysicalSetup& setup) {
  const std::size_t n = state.size();
  std::vector<Complex> amp(n);
  double peak = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    amp[j] = std::abs(state.psi[j]);
    peak = std::max(peak, std::norm(state.psi[j]));
  }
  const auto d2 = spectral_derivative(amp, state.dx(), 2);
  std::vector<double> q(n);
  for (std::size_t j = 0; j < n; ++j) {
    q[j] = std::norm(state.psi[j]) > kNodeDensityFloor * peak
               ? quantum_potential(amp[j].real(), d2[j].real(), state.t, setup)
               : std::numeric_limits<double>::quiet_NaN();
  }
  return q;
}

std::vector<double> current_density(const GridWavefunction& state, const PhysicalSetup& setup) {
  const auto dpsi = spectral_derivative(state.psi, state.dx());
  const double scale = std::exp(-setup.gamma * state.t) * setup.hbar / setup.mass;
  std::vector<double> j(state.size());
  for (std::size_t i = 0; i < j.size(); ++i) j[i] = scale * (std::conj(state.psi[i]) * dpsi[i]).imag();
  return j;
}

namespace {

struct MomentumMoments {
  double p1 = 0.0;
  double p2 = 0.0;
};

MomentumMoments momentum_moments(const GridWavefunction& state, double hbar) {
  std::vector<Complex> buf = state.psi;
  Fft(buf.size()).forward(buf);
  const auto k = wavenumbers(buf.size(), state.dx());
  double total = 0.0;
  MomentumMoments m;
  for (std::size_t j = 0; j < buf.size(); ++j) {
    const double w = std::norm(buf[j]);
    const double p = hbar * k[j];
    total += w;
    m.p1 += w * p;
    m.p2 += w * p * p;
  }
  m.p1 /= total;
  m.p2 /= total;
  return m;
}

}  // namespace

double momentum_expectation(const GridWavefunction& state, double hbar) {
  return momentum_moments(state, hbar).p1;
}

GridObservables grid_observables(const GridWavefunction& state, const PhysicalSetup& setup) {
  const std::size_t n = state.size();
  const double dx = state.dx();
  double s0 = 0.0;
  double s1 = 0.0;
  double sv = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double w = std::norm(state.psi[j]);
    const double x = state.x(j);
    s0 += w;
    s1 += w * x;
    sv += w * potential_eval(setup.potential, setup.mass, x).value;
  }
  const double mean = s1 / s0;
  double s2 = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double d = state.x(j) - mean;
    s2 += std::norm(state.psi[j]) * d * d;
  }
  const auto mom = momentum_moments(state, setup.hbar);
  const double shrink = std::exp(-2.0 * setup.gamma * state.t);
  GridObservables out;
  out.norm = s0 * dx;
  out.mean_x = mean;
  out.dispersion = std::sqrt(s2 / s0);
  out.energy = shrink * mom.p2 / (2.0 * setup.mass) + sv / s0;
  return out;
}

ContinuityResidual continuity_residual(const GridWavefunction& before, const GridWavefunction& mid,
                                       const GridWavefunction& after, const PhysicalSetup& setup) {
  const std::size_t n = mid.size();
  if (before.size() != n || after.size() != n) throw DomainError("continuity snapshots must share a grid");
  const double span = after.t - before.t;
  if (!(span > 0.0)) throw DomainError("continuity snapshots must be ordered in time");
  const auto current = current_density(mid, setup);
  std::vector<Complex> jc(current.begin(), current.end());
  const auto dj = spectral_derivative(jc, mid.dx());
  ContinuityResidual out;
  for (std::size_t i = 0; i < n; ++i) {
    const double drho = (std::norm(after.psi[i]) - std::norm(before.psi[i])) / span;
    out.max_drho_dt = std::max(out.max_drho_dt, std::abs(drho));
    out.max_residual = std::max(out.max_residual, std::abs(drho + dj[i].real()));
  }
  return out;
}

void ObservableSeries::push(double t, double x, double dx, double e, double n) {
  times.push_back(t);
  mean_x.push_back(x);
  dispersion.push_back(dx);
  energy.push_back(e);
  norm.push_back(n);
}

namespace {

// Coefficients of ln psi = c2 x^2 + c1 x + c0 for a Gaussian in canonical variables.
struct Quadratic {
  Complex c2, c1, c0;
};

Quadratic log_coefficients(const GaussianParams& s, double hbar) {
  const Complex i_h(0.0, 1.0 / hbar);
  return {i_h * s.alpha, i_h * (s.P - 2.0 * s.alpha * s.X), i_h * (s.alpha * s.X * s.X - s.P * s.X + s.f)};
}

// Overlap conj(psi_j) psi_k: log of its integral, its complex centre mu and s = -1/(2 C2).
struct Overlap {
  Complex log_i0, mu, s;
};

Overlap overlap(const Quadratic& j, const Quadratic& k) {
  const Complex c2 = std::conj(j.c2) + k.c2;
  const Complex c1 = std::conj(j.c1) + k.c1;
  const Complex c0 = std::conj(j.c0) + k.c0;
  return {0.5 * std::log(kPi / -c2) + c0 - c1 * c1 / (4.0 * c2), -c1 / (2.0 * c2), -1.0 / (2.0 * c2)};
}

}  // namespace

GridObservables superposition_observables(const GaussianParams& a, const GaussianParams& b, const PhysicalSetup& setup) {
  if (a.t != b.t) throw DomainError("superposition packets must be evaluated at the same time");
  if (!(a.alpha.imag() > 0.0) || !(b.alpha.imag() > 0.0))
    throw NonNormalizableError("superposition packets need Im alpha > 0");
  const double hbar = setup.hbar;
  const GaussianParams* s[2] = {&a, &b};
  const Quadratic q[2] = {log_coefficients(a, hbar), log_coefficients(b, hbar)};
  Overlap o[2][2];
  double shift = -std::numeric_limits<double>::infinity();
  for (int j = 0; j < 2; ++j)
    for (int k = 0; k < 2; ++k) {
      o[j][k] = overlap(q[j], q[k]);
      shift = std::max(shift, o[j][k].log_i0.real());
    }
  Complex w[2][2];
  Complex norm{}, first{};
  for (int j = 0; j < 2; ++j)
    for (int k = 0; k < 2; ++k) {
      w[j][k] = std::exp(o[j][k].log_i0 - shift);
      norm += w[j][k];
      first += o[j][k].mu * w[j][k];
    }
  const double mean = (first / norm).real();

  // Second moments about the mean; P psi_k = (2 alpha_k (x - X_k) + P_k) psi_k, evaluated at the
  // complex centre of each overlap so that large centroid momenta do not cancel.
  Complex second{}, p2{};
  for (int j = 0; j < 2; ++j)
    for (int k = 0; k < 2; ++k) {
      const Overlap& ov = o[j][k];
      const Complex d = ov.mu - mean;
      second += (d * d + ov.s) * w[j][k];
      const Complex uj = std::conj(2.0 * s[j]->alpha);
      const Complex uk = 2.0 * s[k]->alpha;
      const Complex lj = uj * (ov.mu - s[j]->X) + s[j]->P;
      const Complex lk = uk * (ov.mu - s[k]->X) + s[k]->P;
      p2 += (uj * uk * ov.s + lj * lk) * w[j][k];
    }
  const double variance = (second / norm).real();
  const double p_sq = (p2 / norm).real();
  const auto v = potential_eval(setup.potential, setup.mass, mean);
  GridObservables out;
  out.mean_x = mean;
  out.dispersion = std::sqrt(std::max(variance, 0.0));
  out.energy = std::exp(-2.0 * setup.gamma * a.t) * p_sq / (2.0 * setup.mass) + v.value + 0.5 * v.second * variance;
  out.norm = norm.real() * std::exp(shift);
  return out;
}

GaussianObservables quasi_eigenstate_observables(int n, double t, const PhysicalSetup& setup) {
  const double omega0 = harmonic_omega0(setup);
  const auto regime = classify_regime(setup);
  if (regime.kind != Regime::Underdamped) throw DomainError("quasi-eigenstates need omega0 > gamma/2");
  if (n < 0) throw DomainError("eigenstate order must be non-negative");
  const double level = n + 0.5;
  const double decay = std::exp(-setup.gamma * t);
  GaussianObservables out;
  out.mean_x = 0.0;
  out.dispersion = std::sqrt(level * setup.hbar / (setup.mass * regime.rate) * decay);
  out.energy = level * setup.hbar * omega0 * omega0 / regime.rate * decay;
  return out;
}

void write_observables(std::ostream& os, const ObservableSeries& series, const std::vector<std::string>& header) {
  Table table;
  table.header = header;
  table.columns = {"t", "mean_x", "dispersion", "energy", "norm"};
  for (std::size_t k = 0; k < series.size(); ++k)
    table.rows.push_back({series.times[k], series.mean_x[k], series.dispersion[k], series.energy[k], series.norm[k]});
  write_table(os, table);
}

}  // namespace ckdyn
