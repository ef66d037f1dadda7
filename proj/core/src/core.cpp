#include "ckdyn/core.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ckdyn/errors.hpp"
#include "ckdyn/format.hpp"

namespace ckdyn {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

}  // namespace

void validate(const PhysicalSetup& setup) {
  if (!(setup.mass > 0.0) || !std::isfinite(setup.mass)) {
    throw DomainError("mass must be positive and finite");
  }
  if (!(setup.hbar > 0.0) || !std::isfinite(setup.hbar)) {
    throw DomainError("hbar must be positive and finite");
  }
  if (!(setup.gamma >= 0.0) || !std::isfinite(setup.gamma)) {
    throw DomainError("gamma must be non-negative and finite");
  }
  if (const auto* h = std::get_if<HarmonicPotential>(&setup.potential)) {
    if (!(h->omega0 > 0.0) || !std::isfinite(h->omega0)) {
      throw DomainError("harmonic omega0 must be positive and finite");
    }
  }
  if (const auto* l = std::get_if<LinearPotential>(&setup.potential)) {
    if (!std::isfinite(l->a)) throw DomainError("linear slope must be finite");
  }
}

std::vector<std::string> setup_warnings(const PhysicalSetup& setup) {
  std::vector<std::string> out;
  if (const auto* l = std::get_if<LinearPotential>(&setup.potential); l && l->a <= 0.0) {
    std::ostringstream os;
    os << "linear slope a = " << l->a << " is not positive; V(x) = -m a x then pulls toward -x";
    out.push_back(os.str());
  }
  return out;
}

bool is_free(const PhysicalSetup& setup) {
  return std::holds_alternative<FreePotential>(setup.potential);
}
bool is_linear(const PhysicalSetup& setup) {
  return std::holds_alternative<LinearPotential>(setup.potential);
}
bool is_harmonic(const PhysicalSetup& setup) {
  return std::holds_alternative<HarmonicPotential>(setup.potential);
}

double harmonic_omega0(const PhysicalSetup& setup) {
  const auto* h = std::get_if<HarmonicPotential>(&setup.potential);
  if (h == nullptr) throw DomainError("operation requires a harmonic potential");
  return h->omega0;
}

double linear_slope(const PhysicalSetup& setup) {
  const auto* l = std::get_if<LinearPotential>(&setup.potential);
  if (l == nullptr) throw DomainError("operation requires a linear potential");
  return l->a;
}

PotentialValue potential_eval(const PotentialSpec& spec, double mass, double x) {
  return std::visit(
      Overloaded{
          [](const FreePotential&) { return PotentialValue{}; },
          [&](const LinearPotential& l) {
            return PotentialValue{-mass * l.a * x, -mass * l.a, 0.0};
          },
          [&](const HarmonicPotential& h) {
            const double k = mass * h.omega0 * h.omega0;
            return PotentialValue{0.5 * k * x * x, k * x, k};
          },
      },
      spec);
}

DampingRegime classify_regime(const PhysicalSetup& setup) {
  const double w0 = harmonic_omega0(setup);
  const double half_gamma = 0.5 * setup.gamma;
  const double scale = std::max(w0, half_gamma);
  if (std::abs(w0 - half_gamma) <= kCriticalTolerance * scale) {
    return {Regime::Critical, 0.0, 0.0};
  }
  if (w0 > half_gamma) {
    // (w0 - g)(w0 + g) avoids cancellation near the critical band.
    const double omega = std::sqrt((w0 - half_gamma) * (w0 + half_gamma));
    return {Regime::Underdamped, omega, std::atan2(half_gamma, omega)};
  }
  const double big_gamma = std::sqrt((half_gamma - w0) * (half_gamma + w0));
  return {Regime::Overdamped, big_gamma, std::atanh(big_gamma / half_gamma)};
}

const char* to_string(Regime regime) {
  switch (regime) {
    case Regime::Underdamped:
      return "underdamped";
    case Regime::Critical:
      return "critical";
    case Regime::Overdamped:
      return "overdamped";
  }
  return "unknown";
}

double contracted_time(double gamma, double t) {
  if (gamma == 0.0) return t;
  return -std::expm1(-gamma * t) / gamma;
}

double ramp_time_squared(double gamma, double t) {
  const double u = gamma * t;
  if (std::abs(u) < 0.1) {
    // t^2 * sum_{k>=2} (-u)^{k-2} / k!
    double term = 0.5;
    double sum = 0.0;
    for (int k = 2; k < 20; ++k) {
      sum += term;
      term *= -u / static_cast<double>(k + 1);
    }
    return t * t * sum;
  }
  return (u + std::expm1(-u)) / (gamma * gamma);
}

}  // namespace ckdyn

namespace ckdyn {

std::string describe(const PhysicalSetup& setup) {
  std::string out = "mass=" + format_double(setup.mass) + " hbar=" + format_double(setup.hbar) +
                    " gamma=" + format_double(setup.gamma) + " potential=";
  std::visit(Overloaded{
                 [&](const FreePotential&) { out += "free"; },
                 [&](const LinearPotential& l) { out += "linear a=" + format_double(l.a); },
                 [&](const HarmonicPotential& h) { out += "harmonic omega0=" + format_double(h.omega0); },
             },
             setup.potential);
  return out;
}

}  // namespace ckdyn
