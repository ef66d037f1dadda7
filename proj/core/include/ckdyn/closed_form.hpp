#pragma once

#include <optional>

#include "ckdyn/core.hpp"
#include "ckdyn/gaussian_ode.hpp"

namespace ckdyn {

// ---------------------------------------------------------------------------
// Free packet
// ---------------------------------------------------------------------------

/// Exact free damped Gaussian. `f_t` includes the classical action `action`.
struct FreeSolution {
  double x_t = 0.0;
  double p_t = 0.0;
  Complex alpha_t{};
  double sigma_t = 0.0;
  Complex sigma_tilde_t{};
  Complex f_t{};
  double action = 0.0;
};

FreeSolution free_solution(double t, double x0, double p0, double sigma0, const PhysicalSetup& setup);

/// sigma0 sqrt(1 + (hbar / 2 m gamma sigma0^2)^2); +inf at gamma == 0.
double free_limit_width(double sigma0, const PhysicalSetup& setup);

// ---------------------------------------------------------------------------
// Centroids
// ---------------------------------------------------------------------------

/// Physical centroid (x_t, p_t).
struct Centroid {
  double x = 0.0;
  double p = 0.0;
};

/// Linear potential V = -m a x; gamma == 0 gives uniformly accelerated motion.
Centroid linear_solution(double t, double x0, double p0, const PhysicalSetup& setup);

/// Long-time uniform motion x0 + p0/(m gamma) - a/gamma^2 + (a/gamma) t, p = m a / gamma.
Centroid linear_asymptote(double t, double x0, double p0, const PhysicalSetup& setup);

/// Damped oscillator centroid in the given regime. p0 == 0 is the turning-point launch;
/// other p0 use the same fundamental solutions. DomainError if `regime` does not match setup.
Centroid harmonic_centroid(double t, double x0, double p0, const DampingRegime& regime,
                           const PhysicalSetup& setup);

// ---------------------------------------------------------------------------
// Harmonic shape (Riccati) dynamics, alpha_t = g_t e^{gamma t}
// ---------------------------------------------------------------------------

/// Roots of g^2 + (m gamma / 2) g + (m omega0 / 2)^2 and beta = sqrt((gamma/2)^2 - omega0^2)
/// on the principal branch (i Omega underdamped, Gamma overdamped, 0 critical).
struct HarmonicShapeState {
  Complex g_plus{};
  Complex g_minus{};
  Complex beta{};
};

HarmonicShapeState harmonic_shape_roots(const PhysicalSetup& setup);

/// Time at which the Riccati solution started from g0 blows up, if it ever does.
/// Normalizable data (Im g0 > 0) never has one.
std::optional<double> riccati_pole_time(Complex g0, const PhysicalSetup& setup);

/// g_t for the harmonic Riccati flow. Throws SingularStateError at a pole.
Complex harmonic_g(double t, Complex g0, const PhysicalSetup& setup);

/// alpha_t = g e^{gamma t} with constant g (g_+ or g_s), and its f_t (classical action excluded).
struct StationaryShape {
  Regime regime = Regime::Underdamped;
  Complex g{};
  Complex f0{};
  /// Constant df/dt = i hbar g / m.
  Complex f_rate{};
  double gamma = 0.0;
  double hbar = 1.0;
  bool normalizable = false;

  Complex alpha(double t) const;
  Complex f(double t) const;
  /// e^{-gamma t / 2} sqrt(hbar / 2 m Omega); NonNormalizableError for real g.
  double width(double t) const;
};

StationaryShape stationary_alpha(const DampingRegime& regime, const PhysicalSetup& setup);

// ---------------------------------------------------------------------------
// Harmonic wave functions
// ---------------------------------------------------------------------------

inline constexpr int kMaxHermiteOrder = 50;

/// Physicists' Hermite polynomial H_n(x) by the three-term recurrence.
double hermite(int n, double x);

/// Quasi-stationary dissipative eigenstate Phi_n(x, t); DomainError unless omega0 > gamma/2.
Complex quasi_eigenstate(int n, double x, double t, const PhysicalSetup& setup);

/// d Phi_n / dx.
Complex quasi_eigenstate_gradient(int n, double x, double t, const PhysicalSetup& setup);

/// Stationary-shape coherent packet launched at rest from x0 (constant width for gamma == 0,
/// shrinking width e^{-gamma t/2} sqrt(hbar/2 m Omega) when underdamped).
/// NonNormalizableError for critical or overdamped friction.
GaussianParams coherent_packet_params(double t, double x0, const PhysicalSetup& setup);
Complex coherent_packet(double x, double t, double x0, const PhysicalSetup& setup);

// ---------------------------------------------------------------------------
// Closed-form Gaussian parameter sets (for velocity fields and densities)
// ---------------------------------------------------------------------------

/// Free packet, f includes the classical action.
GaussianParams free_params(double t, double x0, double p0, double sigma0, const PhysicalSetup& setup);

/// Linear potential; f carries the normalization only.
GaussianParams linear_params(double t, double x0, double p0, double sigma0, const PhysicalSetup& setup);

/// Harmonic well with arbitrary initial shape g0 = alpha_0; f carries the normalization only.
GaussianParams harmonic_params(double t, double x0, double p0, Complex g0, const PhysicalSetup& setup);

}  // namespace ckdyn
