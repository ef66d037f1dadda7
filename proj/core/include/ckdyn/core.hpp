#pragma once

#include <complex>
#include <string>
#include <variant>
#include <vector>

namespace ckdyn {

using Complex = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;

struct FreePotential {};

/// V(x) = -m a x; a > 0 pulls toward +x.
struct LinearPotential {
  double a = 0.0;
};

/// V(x) = m omega0^2 x^2 / 2.
struct HarmonicPotential {
  double omega0 = 1.0;
};

using PotentialSpec = std::variant<FreePotential, LinearPotential, HarmonicPotential>;

/// Mass, action quantum, friction rate and external potential of a Caldirola-Kanai run.
/// All downstream operations reduce to the frictionless textbook results at gamma == 0.
struct PhysicalSetup {
  double mass = 1.0;
  double hbar = 1.0;
  double gamma = 0.0;
  PotentialSpec potential = FreePotential{};
};

/// Throws DomainError unless mass, hbar > 0, gamma >= 0 and omega0 > 0 for harmonic wells.
void validate(const PhysicalSetup& setup);

/// Non-fatal oddities of an otherwise valid setup (e.g. a linear slope with a <= 0).
std::vector<std::string> setup_warnings(const PhysicalSetup& setup);

bool is_free(const PhysicalSetup& setup);
bool is_linear(const PhysicalSetup& setup);
bool is_harmonic(const PhysicalSetup& setup);

/// Harmonic frequency; DomainError for other potentials.
double harmonic_omega0(const PhysicalSetup& setup);
/// Linear slope a; DomainError for other potentials.
double linear_slope(const PhysicalSetup& setup);

struct PotentialValue {
  double value = 0.0;
  double first = 0.0;
  double second = 0.0;
};

/// V, V' and V'' at x. The quadratic Taylor expansion about any point is exact for every variant.
PotentialValue potential_eval(const PotentialSpec& spec, double mass, double x);

enum class Regime { Underdamped, Critical, Overdamped };

/// Harmonic damping regime. `rate` is Omega (underdamped), Gamma (overdamped) or 0 (critical).
/// `phase` is atan(gamma / 2 Omega) for underdamped motion and artanh(2 Gamma / gamma) for
/// overdamped motion, so that the overdamped turning-point centroid reads
/// (omega0 / Gamma) x0 e^{-gamma t / 2} sinh(Gamma t + phase).
struct DampingRegime {
  Regime kind = Regime::Underdamped;
  double rate = 0.0;
  double phase = 0.0;
};

/// Relative band |omega0 - gamma/2| <= tol * max(omega0, gamma/2) classified as critical.
inline constexpr double kCriticalTolerance = 1e-12;

DampingRegime classify_regime(const PhysicalSetup& setup);

const char* to_string(Regime regime);

/// (1 - e^{-gamma t}) / gamma, equal to t at gamma == 0 and evaluated without cancellation.
double contracted_time(double gamma, double t);

/// (gamma t - 1 + e^{-gamma t}) / gamma^2, equal to t^2 / 2 at gamma == 0.
double ramp_time_squared(double gamma, double t);

/// One-line key=value summary of a setup, e.g. "mass=1 hbar=1 gamma=0.5 potential=linear a=0.25".
std::string describe(const PhysicalSetup& setup);

}  // namespace ckdyn
