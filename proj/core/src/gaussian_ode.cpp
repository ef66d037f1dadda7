#include "ckdyn/gaussian_ode.hpp"

#include <cmath>
#include <sstream>

#include "ckdyn/errors.hpp"

namespace ckdyn {

namespace {

constexpr double kOverflowLimit = 1e300;

struct Stage {
  double X;
  double P;
  Complex alpha;
  Complex f;
  double action;
};

Stage to_stage(const GaussianParams& s) { return {s.X, s.P, s.alpha, s.f, s.action}; }

Stage advance(const Stage& s, const AnsatzDerivatives& d, double h) {
  return {s.X + h * d.dX, s.P + h * d.dP, s.alpha + h * d.dalpha, s.f + h * d.df,
          s.action + h * d.daction};
}

AnsatzDerivatives derivatives_at(const Stage& s, double t, const PhysicalSetup& setup) {
  const double m = setup.mass;
  const double decay = std::exp(-setup.gamma * t);
  const double growth = std::exp(setup.gamma * t);
  const PotentialValue v = potential_eval(setup.potential, m, s.X);
  const double lagrangian = s.P * s.P / (2.0 * m) * decay - v.value * growth;

  AnsatzDerivatives d;
  d.dX = s.P / m * decay;
  d.dP = -v.first * growth;
  d.dalpha = -2.0 * s.alpha * s.alpha / m * decay - 0.5 * v.second * growth;
  d.df = Complex(0.0, setup.hbar) * s.alpha / m * decay + lagrangian;
  d.daction = lagrangian;
  return d;
}

void guard(const GaussianParams& s, const PhysicalSetup& setup) {
  const double growth = setup.gamma * s.t;
  if (std::abs(s.alpha) > kOverflowLimit || growth > std::log(kOverflowLimit) ||
      std::abs(s.f.real()) > kOverflowLimit || !std::isfinite(s.X) || !std::isfinite(s.P)) {
    std::ostringstream os;
    os << "Gaussian parameters overflow at t = " << s.t << " (|alpha| = " << std::abs(s.alpha)
       << ", gamma t = " << growth << ")";
    throw OverflowError(os.str());
  }
  if (!(s.alpha.imag() > 0.0)) {
    std::ostringstream os;
    os << "shape parameter lost its Gaussian envelope at t = " << s.t
       << " (Im alpha = " << s.alpha.imag() << ")";
    throw NonNormalizableError(os.str());
  }
}

}  // namespace

double GaussianParams::dispersion(double hbar) const { return std::sqrt(hbar / (4.0 * alpha.imag())); }

double GaussianParams::physical_momentum(double gamma) const { return P * std::exp(-gamma * t); }

Complex GaussianParams::amplitude(double x, double hbar) const {
  const double y = x - X;
  const Complex exponent = Complex(0.0, 1.0 / hbar) * (alpha * y * y + P * y + f);
  return std::exp(exponent);
}

void validate(const OdeConfig& cfg) {
  if (!(cfg.dt > 0.0)) throw ConfigError("ode dt must be positive");
  if (!(cfg.t_end > 0.0)) throw ConfigError("ode t_end must be positive");
  if (cfg.dt > cfg.t_end) throw ConfigError("ode dt must not exceed t_end");
  if (cfg.record_stride < 1) throw ConfigError("ode record_stride must be >= 1");
}

AnsatzDerivatives ansatz_derivatives(const GaussianParams& state, const PhysicalSetup& setup) {
  return derivatives_at(to_stage(state), state.t, setup);
}

GaussianParams rk4_step(const GaussianParams& state, const PhysicalSetup& setup, double dt) {
  if (!(dt > 0.0)) throw DomainError("rk4_step requires dt > 0");
  const Stage s0 = to_stage(state);
  const double t0 = state.t;
  const AnsatzDerivatives k1 = derivatives_at(s0, t0, setup);
  const AnsatzDerivatives k2 = derivatives_at(advance(s0, k1, 0.5 * dt), t0 + 0.5 * dt, setup);
  const AnsatzDerivatives k3 = derivatives_at(advance(s0, k2, 0.5 * dt), t0 + 0.5 * dt, setup);
  const AnsatzDerivatives k4 = derivatives_at(advance(s0, k3, dt), t0 + dt, setup);

  const double w = dt / 6.0;
  GaussianParams out;
  out.X = s0.X + w * (k1.dX + 2.0 * k2.dX + 2.0 * k3.dX + k4.dX);
  out.P = s0.P + w * (k1.dP + 2.0 * k2.dP + 2.0 * k3.dP + k4.dP);
  out.alpha = s0.alpha + w * (k1.dalpha + 2.0 * k2.dalpha + 2.0 * k3.dalpha + k4.dalpha);
  out.f = s0.f + w * (k1.df + 2.0 * k2.df + 2.0 * k3.df + k4.df);
  out.action = s0.action + w * (k1.daction + 2.0 * k2.daction + 2.0 * k3.daction + k4.daction);
  out.t = t0 + dt;
  guard(out, setup);
  return out;
}

std::vector<GaussianParams> propagate(const GaussianParams& state0, const PhysicalSetup& setup,
                                      const OdeConfig& cfg) {
  validate(setup);
  validate(cfg);
  if (!(state0.alpha.imag() > 0.0)) {
    throw NonNormalizableError("initial Gaussian state is not normalizable (Im alpha <= 0)");
  }
  const auto n_steps = static_cast<long long>(std::floor(cfg.t_end / cfg.dt + 1e-9));
  std::vector<GaussianParams> out;
  out.reserve(static_cast<std::size_t>(n_steps / cfg.record_stride + 1));
  out.push_back(state0);
  GaussianParams s = state0;
  for (long long k = 1; k <= n_steps; ++k) {
    s = rk4_step(s, setup, cfg.dt);
    // Pin the clock to k*dt so long runs do not accumulate round-off in t.
    s.t = state0.t + static_cast<double>(k) * cfg.dt;
    if (k % cfg.record_stride == 0) out.push_back(s);
  }
  return out;
}

GaussianParams initial_packet(double x0, double p0, double sigma0, const PhysicalSetup& setup) {
  if (!(sigma0 > 0.0)) throw DomainError("initial_packet requires sigma0 > 0");
  GaussianParams s;
  s.X = x0;
  s.P = p0;
  s.alpha = Complex(0.0, setup.hbar / (4.0 * sigma0 * sigma0));
  s.f = Complex(0.0, setup.hbar / 4.0 * std::log(2.0 * kPi * sigma0 * sigma0));
  s.t = 0.0;
  return s;
}

OdeTrack::OdeTrack(GaussianParams state0, PhysicalSetup setup, double max_dt)
    : initial_(state0), current_(state0), setup_(std::move(setup)), max_dt_(max_dt) {
  validate(setup_);
  if (!(max_dt_ > 0.0)) throw DomainError("OdeTrack requires max_dt > 0");
}

const GaussianParams& OdeTrack::at(double t) {
  if (t < initial_.t) throw DomainError("OdeTrack queried before its initial time");
  if (t < current_.t) current_ = initial_;
  while (current_.t < t) {
    const double remaining = t - current_.t;
    if (remaining <= 1e-14 * std::max(1.0, std::abs(t))) {
      current_.t = t;
      break;
    }
    const auto steps = std::ceil(remaining / max_dt_ - 1e-9);
    const double h = remaining / std::max(1.0, steps);
    const double target = current_.t + h;
    current_ = rk4_step(current_, setup_, h);
    current_.t = target;
  }
  return current_;
}

}  // namespace ckdyn
