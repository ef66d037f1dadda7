#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "ckdyn/core.hpp"
#include "ckdyn/gaussian_ode.hpp"
#include "ckdyn/grid_solver.hpp"

namespace ckdyn {

struct GaussianObservables {
  double mean_x = 0.0;
  double dispersion = 0.0;
  double energy = 0.0;
};

/// <x>, sqrt(hbar / 4 Im alpha) and
/// E = p^2/2m + V + (hbar/2m)(|alpha|^2 / Im alpha) e^{-2 gamma t} + hbar V'' / (8 Im alpha).
/// NonNormalizableError if Im alpha <= 0.
GaussianObservables gaussian_observables(const GaussianParams& state, const PhysicalSetup& setup);

/// Exact mean energy of a Gaussian of initial width sigma0 in V = -m a x.
double linear_energy(double t, double x0, double p0, double sigma0, const PhysicalSetup& setup);

/// Long-time form -m a x0 - p0 a / gamma + (m a^2 / 2 gamma^2)(3 - 2 gamma t); DomainError at gamma == 0.
double linear_energy_asymptote(double t, double x0, double p0, const PhysicalSetup& setup);

/// d E / dt for gamma t >> 1: -m a^2 / gamma.
double linear_energy_slope(const PhysicalSetup& setup);

/// Mean energy of the underdamped stationary-shape coherent packet launched at rest from x0:
/// (m omega0^2 x0^2 / 2)(omega0/Omega)^2 [1 + (gamma/2 omega0) sin(2 Omega t - phi)] e^{-gamma t}
/// + (hbar omega0 / 2)(omega0/Omega) e^{-gamma t}. DomainError for other regimes.
double harmonic_energy(double t, double x0, const PhysicalSetup& setup);

/// Q = -(hbar^2 / 2m) e^{-gamma t} (sqrt rho)'' / sqrt rho from the amplitude and its second derivative.
double quantum_potential(double sqrt_rho, double d2_sqrt_rho, double t, const PhysicalSetup& setup);

/// Same quantity in terms of rho: -(hbar^2 / 4m) e^{-gamma t} [rho''/rho - rho'^2 / (2 rho^2)].
double quantum_potential_rho(double rho, double drho, double d2rho, double t, const PhysicalSetup& setup);

/// Q for a Gaussian density of width sigma centred at xc.
double quantum_potential_gaussian(double x, double xc, double sigma, double t, const PhysicalSetup& setup);

/// Q on the grid with spectral derivatives; NaN where rho is below kNodeDensityFloor of its peak.
std::vector<double> quantum_potential(const GridWavefunction& state, const PhysicalSetup& setup);

/// J = e^{-gamma t} (hbar/m) Im(psi* psi_x).
std::vector<double> current_density(const GridWavefunction& state, const PhysicalSetup& setup);

/// Canonical <P> = sum hbar k |psi_k|^2, normalized by the state norm.
double momentum_expectation(const GridWavefunction& state, double hbar);

struct GridObservables {
  double mean_x = 0.0;
  double dispersion = 0.0;
  double energy = 0.0;
  double norm = 0.0;
};

/// Moments by quadrature; energy e^{-2 gamma t} <P^2>/2m + <V>, i.e. <H> e^{-gamma t}.
GridObservables grid_observables(const GridWavefunction& state, const PhysicalSetup& setup);

/// Same moments for psi_a + psi_b from Gaussian overlap integrals (no grid). `norm` is the
/// unnormalized <psi|psi>; the other fields are normalized by it. Both packets must share t.
GridObservables superposition_observables(const GaussianParams& a, const GaussianParams& b, const PhysicalSetup& setup);

/// Mean 0, dispersion sqrt((n + 1/2) hbar / m Omega) e^{-gamma t/2}, energy (n + 1/2) hbar omega0^2 / Omega e^{-gamma t}.
GaussianObservables quasi_eigenstate_observables(int n, double t, const PhysicalSetup& setup);

struct ContinuityResidual {
  double max_residual = 0.0;
  double max_drho_dt = 0.0;
};

/// (rho(after) - rho(before)) / (t_after - t_before) + d/dx J(mid) in the max norm.
ContinuityResidual continuity_residual(const GridWavefunction& before, const GridWavefunction& mid,
                                       const GridWavefunction& after, const PhysicalSetup& setup);

struct ObservableSeries {
  std::vector<double> times;
  std::vector<double> mean_x;
  std::vector<double> dispersion;
  std::vector<double> energy;
  std::vector<double> norm;

  void push(double t, double x, double dx, double e, double n);
  std::size_t size() const noexcept { return times.size(); }
};

/// Columns t, mean_x, dispersion, energy, norm.
void write_observables(std::ostream& os, const ObservableSeries& series, const std::vector<std::string>& header);

}  // namespace ckdyn
