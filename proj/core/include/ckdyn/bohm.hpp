#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ckdyn/core.hpp"
#include "ckdyn/gaussian_ode.hpp"
#include "ckdyn/grid_solver.hpp"

namespace ckdyn {

/// Fills v[i] with the physical velocity at (t, x[i]). NaN marks an undefined velocity (a node).
using VelocityField = std::function<void(double t, std::span<const double> x, std::span<double> v)>;

/// Gaussian parameters as a function of time.
using ParamsFunction = std::function<GaussianParams(double t)>;

enum class SamplingMode { Quantile, Random };

/// Equiprobable launch points x0 + sigma0 * Phi^{-1}((i + 1/2) / n), ascending.
std::vector<double> quantile_positions(std::size_t n, double x0, double sigma0);

/// n normal deviates from a seeded mt19937_64, sorted ascending.
std::vector<double> random_positions(std::size_t n, double x0, double sigma0, std::uint64_t seed);

/// Draws from a density sampled on the uniform grid xs by inverting its trapezoidal CDF.
std::vector<double> sample_from_density(std::span<const double> xs, std::span<const double> rho, std::size_t n,
                                        SamplingMode mode, std::uint64_t seed = 0);

/// Launch points distributed as |psi|^2 of a Gaussian packet.
std::vector<double> sample_initial_positions(const GaussianParams& state, double hbar, std::size_t n,
                                             SamplingMode mode, std::uint64_t seed = 0);

/// e^{-gamma t} (2 Re alpha (x - X) + P) / m.
double velocity_gaussian(const GaussianParams& state, double x, const PhysicalSetup& setup);

/// Velocity of psi_a + psi_b at x, evaluated with a common log-scale so that distant packets
/// do not underflow. NaN where |psi|^2 falls below 1e-12 of |psi_a|^2 + |psi_b|^2.
double velocity_superposition(const GaussianParams& a, const GaussianParams& b, double x,
                              const PhysicalSetup& setup);

/// |psi_a + psi_b|^2 (unnormalized).
double density_superposition(const GaussianParams& a, const GaussianParams& b, double x, double hbar);

VelocityField gaussian_field(ParamsFunction params, const PhysicalSetup& setup);
VelocityField superposition_field(ParamsFunction a, ParamsFunction b, const PhysicalSetup& setup);
/// -gamma x / 2 for every quasi-eigenstate, independent of its order.
VelocityField quasi_eigenstate_field(const PhysicalSetup& setup);

/// Relative density below which grid velocities are reported as NaN.
inline constexpr double kNodeDensityFloor = 1e-12;

/// e^{-gamma t} (hbar / m) Im(psi* psi_x) / |psi|^2 with a spectral derivative.
std::vector<double> grid_velocity(const GridWavefunction& state, const PhysicalSetup& setup);

/// Four-point Lagrange interpolation of samples on a uniform grid; NaN if a stencil value is NaN.
double interpolate_cubic(double x_min, double dx, std::span<const double> values, double x);

/// Field that co-propagates `prop` to each requested time. Requested times must be
/// non-decreasing and fall on grid steps; callers use trajectory steps of 2k grid steps.
VelocityField grid_field(GridPropagator& prop);

struct TrajectoryConfig {
  double dt = 1e-2;
  double t_end = 1.0;
  int record_stride = 1;
  /// Trajectories leaving [lo, hi] raise TruncationError.
  std::optional<std::pair<double, double>> bounds;
  /// Return the ensemble recorded so far instead of propagating a NumericalError
  /// (including TruncationError) raised by the field or the bounds check.
  bool stop_on_error = false;
};

void validate(const TrajectoryConfig& cfg);

struct TrajectoryEnsemble {
  std::vector<double> launch;
  std::vector<double> times;
  /// positions[k][i]: particle i at times[k].
  std::vector<std::vector<double>> positions;
  /// Particles whose velocity was undefined at least once; the last finite velocity was used.
  std::vector<std::uint8_t> node_flag;
  /// Set when integration stopped early under TrajectoryConfig::stop_on_error.
  std::optional<double> truncated_at;
  std::string truncation_reason;

  std::size_t size() const noexcept { return positions.empty() ? 0 : positions.front().size(); }
  std::vector<double> trajectory(std::size_t i) const;
  std::size_t flagged() const;
};

/// Batched RK4 for dx/dt = v(t, x) from `initial` at t = 0.
TrajectoryEnsemble integrate_trajectories(std::span<const double> initial, const VelocityField& field,
                                          const TrajectoryConfig& cfg);

/// Columns t, x_traj_0 ... x_traj_{n-1} and, when `centroid` is non-empty (one value per
/// recorded time), x_centroid.
void write_trajectories(std::ostream& os, const TrajectoryEnsemble& ensemble,
                        const std::vector<std::string>& header, std::span<const double> centroid = {});

/// Closed trajectory laws.
enum class TrajectoryLaw {
  /// Free or linear Gaussian: x_t + (sigma_t / sigma0)(x(0) - x0).
  Gaussian,
  /// Harmonic quasi-eigenstate: x(0) e^{-gamma t / 2}.
  QuasiEigenstate,
  /// Harmonic stationary-shape packet: x_t + (x(0) - x0) e^{-gbar t / 2}, gbar = gamma or gamma - 2 Gamma.
  StationaryShape,
};

struct AnalyticScenario {
  TrajectoryLaw law = TrajectoryLaw::Gaussian;
  double x0 = 0.0;
  double p0 = 0.0;
  double sigma0 = 1.0;
};

/// DomainError if the law does not fit the potential (Gaussian needs free/linear,
/// the harmonic laws need a harmonic well; quasi-eigenstates need omega0 > gamma/2).
double analytic_trajectory(const AnalyticScenario& scenario, const PhysicalSetup& setup, double x_launch, double t);

/// Decay rate of |x_i(t) - x_t| for the stationary-shape harmonic field: gamma/2 or (gamma - 2 Gamma)/2.
double coalescence_rate(const PhysicalSetup& setup);

}  // namespace ckdyn
