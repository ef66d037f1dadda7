#pragma once

#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "ckdyn/core.hpp"
#include "ckdyn/fft.hpp"

namespace ckdyn {

/// Uniform periodic sampling x_j = x_min + j dx, dx = (x_max - x_min) / n, of psi at time t.
struct GridWavefunction {
  double x_min = 0.0;
  double x_max = 1.0;
  std::vector<Complex> psi;
  double t = 0.0;

  std::size_t size() const noexcept { return psi.size(); }
  double dx() const noexcept { return (x_max - x_min) / static_cast<double>(psi.size()); }
  double x(std::size_t j) const noexcept { return x_min + static_cast<double>(j) * dx(); }
  std::vector<double> positions() const;
  std::vector<double> density() const;
  /// Trapezoidal (periodic) integral of |psi|^2.
  double norm() const;
};

struct GridConfig {
  double dt = 1e-3;
  std::size_t n_points = 4096;
  double x_min = -40.0;
  double x_max = 60.0;
  /// Fraction of the domain at each end covered by a cosine-ramp absorber (0 disables it).
  double absorbing_margin = 0.0;
};

void validate(const GridConfig& cfg);

using AmplitudeFunction = std::function<Complex(double)>;

/// Relative amplitude below which the boundary samples must stay.
inline constexpr double kBoundaryTolerance = 1e-10;
/// Momentum-space probability allowed beyond hbar pi / (8 dx).
inline constexpr double kResolutionTolerance = 1e-10;

/// Samples `initial`, renormalizes to unit norm and checks boundary decay and momentum
/// resolution. Throws DomainError for zero norm and ResolutionError for an unresolved state.
GridWavefunction init_grid(const GridConfig& cfg, const AmplitudeFunction& initial, double t0 = 0.0);

/// max(|psi_0|, |psi_{n-1}|) / max_j |psi_j|.
double boundary_ratio(const GridWavefunction& state);

/// Largest momentum the grid is considered to resolve: hbar pi / (8 dx).
double resolved_momentum(const GridWavefunction& state, double hbar);

/// Fraction of momentum-space probability with |hbar k| > p_cut.
double momentum_tail_fraction(const GridWavefunction& state, double p_cut, double hbar);

/// Throws ResolutionError if the boundary or momentum-resolution invariant is violated.
void check_representable(const GridWavefunction& state, double hbar, bool check_boundary = true);

/// Angular wavenumbers in FFT order for n points spaced dx.
std::vector<double> wavenumbers(std::size_t n, double dx);

/// d/dx by FFT; the Nyquist mode is dropped.
std::vector<Complex> spectral_derivative(std::span<const Complex> values, double dx, int order = 1);

/// Strang split-operator stepper for i hbar psi_t = -(hbar^2/2m) e^{-gamma t} psi_xx + V e^{gamma t} psi.
/// Both exponential prefactors are evaluated at the step midpoint.
class SplitStepper {
 public:
  SplitStepper(const PhysicalSetup& setup, std::size_t n, double x_min, double x_max);

  /// Advances in place; throws InstabilityError if the norm changes by more than 1e-8 relative.
  void step(GridWavefunction& state, double dt) const;

 private:
  PhysicalSetup setup_;
  Fft fft_;
  std::vector<double> k2_;
  std::vector<double> potential_;
  bool has_potential_;
};

GridWavefunction split_step(const GridWavefunction& state, const PhysicalSetup& setup, double dt);

/// Stateful propagator: holds the current state and advances it by whole steps of cfg.dt.
class GridPropagator {
 public:
  GridPropagator(GridWavefunction state0, const PhysicalSetup& setup, const GridConfig& cfg);

  const GridWavefunction& state() const noexcept { return state_; }
  const PhysicalSetup& setup() const noexcept { return setup_; }
  const GridConfig& config() const noexcept { return cfg_; }
  double time() const noexcept { return state_.t; }

  void step();
  /// Advances to the step nearest to t (t must not precede the current time).
  void advance_to(double t);

 private:
  GridWavefunction state_;
  PhysicalSetup setup_;
  GridConfig cfg_;
  SplitStepper stepper_;
  std::vector<double> mask_;
  double t0_;
  long long steps_ = 0;
};

/// Snapshots at the steps nearest to each of `record_times` (sorted ascending). Every snapshot
/// is checked with check_representable; the boundary check is skipped when an absorber is on.
std::vector<GridWavefunction> propagate_grid(const GridWavefunction& state0, const PhysicalSetup& setup,
                                             const GridConfig& cfg, double t_end,
                                             std::span<const double> record_times);

/// Columns x, re_psi, im_psi, rho with a '#' header carrying setup and grid configuration.
void write_snapshot(std::ostream& os, const GridWavefunction& state, const PhysicalSetup& setup,
                    const GridConfig& cfg);

}  // namespace ckdyn
