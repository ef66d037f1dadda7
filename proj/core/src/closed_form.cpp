#include "ckdyn/closed_form.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "ckdyn/errors.hpp"

namespace ckdyn {

namespace {

constexpr Complex kI{0.0, 1.0};

// x_t = e^{-gamma t/2} [x0 C(t) + b S(t)] with C'' = lambda C, C(0) = 1, S = C' / lambda, S(0) = 0.
struct Fundamental {
  double C;
  double S;
  double decay;  // e^{-gamma t / 2}
};

Fundamental fundamental(double t, const DampingRegime& regime, double gamma) {
  const double half = 0.5 * gamma;
  switch (regime.kind) {
    case Regime::Underdamped: {
      const double w = regime.rate;
      return {std::cos(w * t), std::sin(w * t) / w, std::exp(-half * t)};
    }
    case Regime::Critical:
      return {1.0, t, std::exp(-half * t)};
    case Regime::Overdamped: {
      // Fold e^{-gamma t/2} into cosh/sinh so nothing overflows at large Gamma t.
      const double G = regime.rate;
      const double up = std::exp((G - half) * t);
      const double down = std::exp(-(G + half) * t);
      return {0.5 * (up + down), 0.5 * (up - down) / G, 1.0};
    }
  }
  return {1.0, 0.0, 1.0};
}

Complex normalization_f(Complex alpha, double hbar) {
  return Complex(0.0, hbar / 4.0 * std::log(kPi * hbar / (2.0 * alpha.imag())));
}

void require_underdamped(const PhysicalSetup& setup, const char* what) {
  const double w0 = harmonic_omega0(setup);
  if (!(w0 > 0.5 * setup.gamma) || classify_regime(setup).kind != Regime::Underdamped) {
    std::ostringstream os;
    os << what << " is only defined for omega0 > gamma/2 (omega0 = " << w0
       << ", gamma = " << setup.gamma << ")";
    throw DomainError(os.str());
  }
}

}  // namespace

FreeSolution free_solution(double t, double x0, double p0, double sigma0, const PhysicalSetup& setup) {
  validate(setup);
  if (!(sigma0 > 0.0)) throw DomainError("free_solution requires sigma0 > 0");
  const double m = setup.mass;
  const double hbar = setup.hbar;
  const double tau = contracted_time(setup.gamma, t);

  FreeSolution s;
  s.x_t = x0 + p0 / m * tau;
  s.p_t = p0 * std::exp(-setup.gamma * t);
  s.sigma_tilde_t = sigma0 * Complex(1.0, hbar * tau / (2.0 * m * sigma0 * sigma0));
  s.sigma_t = std::abs(s.sigma_tilde_t);
  s.alpha_t = kI * hbar / (4.0 * sigma0 * s.sigma_tilde_t);
  s.action = p0 * p0 / (2.0 * m) * tau;
  s.f_t = kI * hbar / 4.0 * std::log(2.0 * kPi * s.sigma_tilde_t * s.sigma_tilde_t) + s.action;
  return s;
}

double free_limit_width(double sigma0, const PhysicalSetup& setup) {
  if (setup.gamma == 0.0) return std::numeric_limits<double>::infinity();
  const double r = setup.hbar / (2.0 * setup.mass * setup.gamma * sigma0 * sigma0);
  return sigma0 * std::sqrt(1.0 + r * r);
}

Centroid linear_solution(double t, double x0, double p0, const PhysicalSetup& setup) {
  validate(setup);
  const double a = linear_slope(setup);
  const double m = setup.mass;
  const double tau = contracted_time(setup.gamma, t);
  return {x0 + p0 / m * tau + a * ramp_time_squared(setup.gamma, t),
          p0 * std::exp(-setup.gamma * t) + m * a * tau};
}

Centroid linear_asymptote(double t, double x0, double p0, const PhysicalSetup& setup) {
  validate(setup);
  const double a = linear_slope(setup);
  const double g = setup.gamma;
  if (g == 0.0) throw DomainError("linear_asymptote requires gamma > 0");
  const double m = setup.mass;
  return {x0 + p0 / (m * g) - a / (g * g) + a / g * t, m * a / g};
}

Centroid harmonic_centroid(double t, double x0, double p0, const DampingRegime& regime,
                           const PhysicalSetup& setup) {
  validate(setup);
  const DampingRegime actual = classify_regime(setup);
  if (actual.kind != regime.kind) {
    std::ostringstream os;
    os << "regime " << to_string(regime.kind) << " does not match setup (" << to_string(actual.kind)
       << ")";
    throw DomainError(os.str());
  }
  const double m = setup.mass;
  const double g = setup.gamma;
  const double w0 = harmonic_omega0(setup);
  const Fundamental F = fundamental(t, actual, g);
  const double b = 0.5 * g * x0 + p0 / m;
  const double x = F.decay * (x0 * F.C + b * F.S);
  const double v = F.decay * (p0 / m * F.C - (w0 * w0 * x0 + 0.5 * g * p0 / m) * F.S);
  return {x, m * v};
}

HarmonicShapeState harmonic_shape_roots(const PhysicalSetup& setup) {
  validate(setup);
  const DampingRegime r = classify_regime(setup);
  const double m = setup.mass;
  Complex beta{};
  switch (r.kind) {
    case Regime::Underdamped:
      beta = Complex(0.0, r.rate);
      break;
    case Regime::Overdamped:
      beta = Complex(r.rate, 0.0);
      break;
    case Regime::Critical:
      break;
  }
  const Complex base(-0.25 * m * setup.gamma, 0.0);
  return {base + 0.5 * m * beta, base - 0.5 * m * beta, beta};
}

std::optional<double> riccati_pole_time(Complex g0, const PhysicalSetup& setup) {
  const HarmonicShapeState roots = harmonic_shape_roots(setup);
  const DampingRegime r = classify_regime(setup);
  const double m = setup.mass;
  constexpr double eps = 1e-12;
  if (r.kind == Regime::Critical) {
    const Complex d = g0 - roots.g_plus;
    if (std::abs(d.imag()) > eps * std::max(1.0, std::abs(d)) || !(d.real() < 0.0)) return std::nullopt;
    return -m / (2.0 * d.real());
  }
  const Complex num = g0 - roots.g_minus;
  const Complex den = g0 - roots.g_plus;
  if (std::abs(den) == 0.0) return std::nullopt;
  const Complex w = num / den;  // pole where e^{-2 beta t} = w
  if (r.kind == Regime::Overdamped) {
    if (std::abs(w.imag()) > eps * std::abs(w) || !(w.real() > 0.0) || !(w.real() <= 1.0)) {
      return std::nullopt;
    }
    return -std::log(w.real()) / (2.0 * r.rate);
  }
  if (std::abs(std::abs(w) - 1.0) > eps) return std::nullopt;
  double t = -std::arg(w) / (2.0 * r.rate);
  const double period = kPi / r.rate;
  while (t < 0.0) t += period;
  return t;
}

Complex harmonic_g(double t, Complex g0, const PhysicalSetup& setup) {
  const HarmonicShapeState roots = harmonic_shape_roots(setup);
  const DampingRegime r = classify_regime(setup);
  const double m = setup.mass;

  auto singular = [&](double pole) {
    std::ostringstream os;
    os << "Riccati shape flow is singular at t = " << pole << " for g0 = " << g0;
    throw SingularStateError(os.str(), pole);
  };

  if (r.kind == Regime::Critical) {
    const Complex d = g0 - roots.g_plus;
    const Complex den = 1.0 + d * (2.0 * t / m);
    if (std::abs(den) <= 1e-13) singular(riccati_pole_time(g0, setup).value_or(t));
    return roots.g_plus + d / den;
  }
  if (g0 == roots.g_minus || g0 == roots.g_plus) return g0;

  // Divide through by e^{beta t} so that Re(beta) >= 0 never overflows.
  const Complex e = std::exp(-2.0 * roots.beta * t);
  const Complex a = g0 - roots.g_minus;
  const Complex b = g0 - roots.g_plus;
  const Complex den = a - b * e;
  if (std::abs(den) <= 1e-13 * (std::abs(a) + std::abs(b * e))) {
    singular(riccati_pole_time(g0, setup).value_or(t));
  }
  // Offset from the attracting root, so a small Im g is not lost to cancellation.
  return roots.g_plus + (roots.g_plus - roots.g_minus) * (b * e / den);
}

Complex StationaryShape::alpha(double t) const { return g * std::exp(gamma * t); }

Complex StationaryShape::f(double t) const { return f0 + f_rate * t; }

double StationaryShape::width(double t) const {
  if (!normalizable) {
    throw NonNormalizableError(std::string("stationary shape in the ") + to_string(regime) +
                               " regime has no Gaussian envelope");
  }
  return std::sqrt(hbar / (4.0 * alpha(t).imag()));
}

StationaryShape stationary_alpha(const DampingRegime& regime, const PhysicalSetup& setup) {
  const HarmonicShapeState roots = harmonic_shape_roots(setup);
  const DampingRegime actual = classify_regime(setup);
  if (actual.kind != regime.kind) throw DomainError("regime does not match setup");
  StationaryShape s;
  s.regime = actual.kind;
  s.g = roots.g_plus;
  s.gamma = setup.gamma;
  s.hbar = setup.hbar;
  s.normalizable = s.g.imag() > 0.0;
  s.f_rate = kI * setup.hbar * s.g / setup.mass;
  s.f0 = s.normalizable ? normalization_f(s.g, setup.hbar) : Complex{};
  return s;
}

double hermite(int n, double x) {
  if (n < 0) throw DomainError("hermite order must be non-negative");
  double prev = 1.0;
  if (n == 0) return prev;
  double cur = 2.0 * x;
  for (int k = 1; k < n; ++k) {
    const double next = 2.0 * x * cur - 2.0 * k * prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

namespace {

// Normalized Hermite functions h_n(xi) = H_n(xi) e^{-xi^2/2} / sqrt(2^n n! sqrt(pi)) and h_n'.
std::pair<double, double> hermite_function(int n, double xi) {
  double prev = 0.0;
  double cur = std::pow(kPi, -0.25) * std::exp(-0.5 * xi * xi);
  for (int k = 0; k < n; ++k) {
    const double next = std::sqrt(2.0 / (k + 1)) * xi * cur - std::sqrt(static_cast<double>(k) / (k + 1)) * prev;
    prev = cur;
    cur = next;
  }
  const double deriv = std::sqrt(2.0 * n) * prev - xi * cur;
  return {cur, deriv};
}

struct EigenFactors {
  double scale;    // sqrt(m Omega / hbar) e^{gamma t / 2}
  double prefactor;  // (m Omega / hbar)^{1/4} e^{gamma t / 4}
  double chirp;    // m gamma e^{gamma t} / (4 hbar)
  double phase;    // -(n + 1/2) Omega t
};

EigenFactors eigen_factors(int n, double t, const PhysicalSetup& setup) {
  validate(setup);
  require_underdamped(setup, "quasi_eigenstate");
  if (n < 0 || n > kMaxHermiteOrder) throw DomainError("quasi_eigenstate order must be in [0, 50]");
  const double omega = classify_regime(setup).rate;
  const double k = setup.mass * omega / setup.hbar;
  const double g = setup.gamma;
  return {std::sqrt(k) * std::exp(0.5 * g * t), std::pow(k, 0.25) * std::exp(0.25 * g * t),
          setup.mass * g * std::exp(g * t) / (4.0 * setup.hbar), -(n + 0.5) * omega * t};
}

}  // namespace

Complex quasi_eigenstate(int n, double x, double t, const PhysicalSetup& setup) {
  const EigenFactors F = eigen_factors(n, t, setup);
  const auto [h, dh] = hermite_function(n, F.scale * x);
  return F.prefactor * h * std::exp(kI * (F.phase - F.chirp * x * x));
}

Complex quasi_eigenstate_gradient(int n, double x, double t, const PhysicalSetup& setup) {
  const EigenFactors F = eigen_factors(n, t, setup);
  const auto [h, dh] = hermite_function(n, F.scale * x);
  const Complex phase = std::exp(kI * (F.phase - F.chirp * x * x));
  return F.prefactor * phase * (F.scale * dh - kI * 2.0 * F.chirp * x * h);
}

GaussianParams coherent_packet_params(double t, double x0, const PhysicalSetup& setup) {
  validate(setup);
  const DampingRegime r = classify_regime(setup);
  if (r.kind != Regime::Underdamped) {
    throw NonNormalizableError(std::string("coherent packet is not normalizable in the ") +
                               to_string(r.kind) + " regime");
  }
  const StationaryShape shape = stationary_alpha(r, setup);
  const Centroid c = harmonic_centroid(t, x0, 0.0, r, setup);
  GaussianParams s;
  s.t = t;
  s.X = c.x;
  s.P = c.p * std::exp(setup.gamma * t);
  s.alpha = shape.alpha(t);
  s.f = shape.f(t);
  return s;
}

Complex coherent_packet(double x, double t, double x0, const PhysicalSetup& setup) {
  return coherent_packet_params(t, x0, setup).amplitude(x, setup.hbar);
}

GaussianParams free_params(double t, double x0, double p0, double sigma0, const PhysicalSetup& setup) {
  const FreeSolution fs = free_solution(t, x0, p0, sigma0, setup);
  GaussianParams s;
  s.t = t;
  s.X = fs.x_t;
  s.P = p0;
  s.alpha = fs.alpha_t;
  s.f = fs.f_t;
  s.action = fs.action;
  return s;
}

GaussianParams linear_params(double t, double x0, double p0, double sigma0, const PhysicalSetup& setup) {
  const Centroid c = linear_solution(t, x0, p0, setup);
  PhysicalSetup free_setup = setup;
  free_setup.potential = FreePotential{};
  const FreeSolution fs = free_solution(t, x0, p0, sigma0, free_setup);
  GaussianParams s;
  s.t = t;
  s.X = c.x;
  s.P = c.p * std::exp(setup.gamma * t);
  s.alpha = fs.alpha_t;
  s.f = normalization_f(s.alpha, setup.hbar);
  return s;
}

GaussianParams harmonic_params(double t, double x0, double p0, Complex g0, const PhysicalSetup& setup) {
  const DampingRegime r = classify_regime(setup);
  const Centroid c = harmonic_centroid(t, x0, p0, r, setup);
  GaussianParams s;
  s.t = t;
  s.X = c.x;
  s.P = c.p * std::exp(setup.gamma * t);
  s.alpha = harmonic_g(t, g0, setup) * std::exp(setup.gamma * t);
  s.f = s.alpha.imag() > 0.0 ? normalization_f(s.alpha, setup.hbar) : Complex{};
  return s;
}

}  // namespace ckdyn
