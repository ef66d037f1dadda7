#pragma once

#include <vector>

#include "ckdyn/core.hpp"

namespace ckdyn {

/// Gaussian packet psi(X) = exp((i/hbar)[alpha (X - X_t)^2 + P (X - X_t) + f]) in canonical variables.
///
/// `f` carries the full phase/normalization, including the classical action. The action
/// integral is also accumulated separately in `action` so that f - action isolates the
/// shape-driven part. Physical position equals X; physical momentum is P e^{-gamma t}.
struct GaussianParams {
  double X = 0.0;
  double P = 0.0;
  Complex alpha{0.0, 0.0};
  Complex f{0.0, 0.0};
  double t = 0.0;
  double action = 0.0;

  /// sqrt(hbar / (4 Im alpha)).
  double dispersion(double hbar) const;
  double physical_momentum(double gamma) const;
  Complex amplitude(double x, double hbar) const;
};

struct OdeConfig {
  double dt = 1e-3;
  double t_end = 1.0;
  int record_stride = 1;
};

void validate(const OdeConfig& cfg);

struct AnsatzDerivatives {
  double dX = 0.0;
  double dP = 0.0;
  Complex dalpha{0.0, 0.0};
  Complex df{0.0, 0.0};
  /// Lagrangian along the centroid; df already contains it.
  double daction = 0.0;
};

AnsatzDerivatives ansatz_derivatives(const GaussianParams& state, const PhysicalSetup& setup);

/// One classical RK4 step with the e^{+-gamma t} factors evaluated at each stage time.
/// Throws NonNormalizableError if Im alpha <= 0 afterwards and OverflowError past 1e300.
GaussianParams rk4_step(const GaussianParams& state, const PhysicalSetup& setup, double dt);

/// States at t = 0, stride*dt, 2*stride*dt, ... <= t_end.
std::vector<GaussianParams> propagate(const GaussianParams& state0, const PhysicalSetup& setup,
                                      const OdeConfig& cfg);

/// Normalized Gaussian of width sigma0 centred at x0 with momentum p0.
GaussianParams initial_packet(double x0, double p0, double sigma0, const PhysicalSetup& setup);

/// Gaussian parameters produced on demand at non-decreasing times by integrating the
/// ansatz ODEs with steps no longer than `max_dt`. A request earlier than the previous one
/// restarts from the initial state.
class OdeTrack {
 public:
  OdeTrack(GaussianParams state0, PhysicalSetup setup, double max_dt = 1e-3);

  const GaussianParams& at(double t);
  const PhysicalSetup& setup() const { return setup_; }

 private:
  GaussianParams initial_;
  GaussianParams current_;
  PhysicalSetup setup_;
  double max_dt_;
};

}  // namespace ckdyn
