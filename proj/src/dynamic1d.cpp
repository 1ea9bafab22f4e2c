#include "hmc_ergo/dynamic1d.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <tuple>
#include <utility>

#include "hmc_ergo/errors.hpp"
#include "hmc_ergo/quadrature.hpp"

namespace hmc_ergo::dynamic1d {

SmoothExpFamily1D::SmoothExpFamily1D(double beta) : beta_(beta) {
  if (!(beta > 0) || !std::isfinite(beta)) throw ContractViolation("beta must be positive");
}

double SmoothExpFamily1D::potential(double x) const { return std::pow(1.0 + x * x, beta_ / 2) / beta_; }

double SmoothExpFamily1D::derivative(double x) const { return x * std::pow(1.0 + x * x, beta_ / 2 - 1); }

namespace {

/// U(b) - U(a) given a and diff_sq = b^2 - a^2 >= 0.
double drop_from_squares(double beta, double inner, double diff_sq) {
  const double base = 1.0 + inner * inner;
  return std::pow(base, beta / 2) * std::expm1(beta / 2 * std::log1p(diff_sq / base)) / beta;
}

}  // namespace

double SmoothExpFamily1D::potential_drop(double outer, double inner) const {
  const double a = std::abs(outer);
  const double b = std::abs(inner);
  if (b > a) throw ContractViolation("potential_drop needs |inner| <= |outer|");
  return drop_from_squares(beta_, b, (a - b) * (a + b));
}

double hamiltonian(const SmoothExpFamily1D& target, PhasePoint1D z) {
  return target.potential(z.x) + z.p * z.p / 2;
}

void FlowConfig::validate() const {
  if (!(energy_tol > 0)) throw ContractViolation("energy_tol must be positive");
  if (!(average_tol > 0)) throw ContractViolation("average_tol must be positive");
  if (!(initial_step > 0)) throw ContractViolation("initial_step must be positive");
  if (max_substeps < 1) throw ContractViolation("max_substeps must be positive");
}

std::pair<double, double> turning_points(const SmoothExpFamily1D& target, double energy) {
  if (!std::isfinite(energy)) throw RejectedInput("energy must be finite");
  if (!(energy > target.minimum())) {
    throw DegenerateOrbit("energy " + std::to_string(energy) + " does not exceed the potential minimum");
  }
  double lo = 0.0;
  double hi = 1.0;
  while (target.potential(hi) < energy) {
    lo = hi;
    hi *= 2;
    if (!std::isfinite(hi)) throw AccuracyError("could not bracket the turning point");
  }
  // Bisection down to adjacent doubles; 2000 iterations is a hard cap.
  for (int it = 0; it < 2000; ++it) {
    const double mid = lo + (hi - lo) / 2;
    if (mid <= lo || mid >= hi) break;
    (target.potential(mid) < energy ? lo : hi) = mid;
  }
  const double x_plus = lo + (hi - lo) / 2;
  return {-x_plus, x_plus};
}

namespace {

const GaussLegendre<double>& rule() {
  static const GaussLegendre<double> gl(20);
  return gl;
}

/// Suzuki's five-stage fourth-order symmetric composition: weights
/// (w, w, 1 - 4w, w, w) with w = 1 / (4 - 4^(1/3)).
constexpr double kCbrt4 = 1.5874010519681994747517056;
constexpr double kOuter = 1.0 / (4.0 - kCbrt4);
constexpr double kInner = 1.0 - 4.0 * kOuter;

/// State of the surrogate integrator with U and U' at x cached; both come
/// from one pow call.
struct Walker {
  double beta;
  int quarters;  // 2 beta when beta/2 is a small multiple of 1/4, else -1
  PhasePoint1D z;
  double force = 0;
  double potential = 0;

  Walker(const SmoothExpFamily1D& t, PhasePoint1D start) : beta(t.beta()), quarters(-1), z(start) {
    if (2 * beta == std::round(2 * beta) && 2 * beta <= 16) quarters = static_cast<int>(2 * beta);
    evaluate();
  }

  /// base^(beta/2), through square roots when the exponent allows it.
  double power(double base) const {
    if (quarters < 0) return std::pow(base, beta / 2);
    double q = 1.0;
    for (int i = 0; i < quarters / 4; ++i) q *= base;
    switch (quarters % 4) {
      case 1: return q * std::sqrt(std::sqrt(base));
      case 2: return q * std::sqrt(base);
      case 3: {
        const double r = std::sqrt(base);
        return q * r * std::sqrt(r);
      }
      default: return q;
    }
  }

  void evaluate() {
    const double base = 1.0 + z.x * z.x;
    const double q = power(base);
    potential = q / beta;
    force = z.x * q / base;
  }

  double energy() const { return potential + z.p * z.p / 2; }

  void kick_drift_kick(double h) {
    z.p -= h / 2 * force;
    z.x += h * z.p;
    evaluate();
    z.p -= h / 2 * force;
  }

  void step(double h) {
    kick_drift_kick(kOuter * h);
    kick_drift_kick(kOuter * h);
    kick_drift_kick(kInner * h);
    kick_drift_kick(kOuter * h);
    kick_drift_kick(kOuter * h);
  }
};

double energy_scale(double energy) { return std::max(1.0, std::abs(energy)); }

/// Takes n substeps of length h, calling visit(k, walker) for k = 0..n-1 before
/// each step; visit may return false to stop early. Returns the largest
/// energy drift seen, or +inf if the state went non-finite.
template <typename Visit>
double walk(const SmoothExpFamily1D& target, PhasePoint1D& z, double h, long n, Visit&& visit) {
  Walker w(target, z);
  const double h0 = w.energy();
  double worst = 0;
  for (long k = 0; k < n; ++k) {
    if (!visit(k, std::as_const(w))) break;
    w.step(h);
    const double drift = std::abs(w.energy() - h0);
    if (!std::isfinite(drift)) return std::numeric_limits<double>::infinity();
    worst = std::max(worst, drift);
  }
  z = w.z;
  return worst;
}

long initial_substeps(double t, const FlowConfig& cfg) {
  return std::max(1L, static_cast<long>(std::ceil(t / cfg.initial_step)));
}

/// Next level on the doubling ladder after a walk at n drifted by `drift`.
/// Fourth-order drift scales as n^-4, so skip the doublings that cannot pass;
/// never jump past max_substeps when a smaller ladder level still fits.
long next_level(long n, double drift, double tol, long max_substeps) {
  int doublings = 1;
  if (std::isfinite(drift) && drift > tol) {
    doublings = std::max(1, static_cast<int>(std::ceil(std::log2(std::pow(drift / tol, 0.25)))));
  }
  doublings = std::min(doublings, 40);
  while (doublings > 1 && (n << doublings) > max_substeps) --doublings;
  return n << doublings;
}

}  // namespace

OrbitSpec period(const SmoothExpFamily1D& target, PhasePoint1D z0) {
  if (!std::isfinite(z0.x) || !std::isfinite(z0.p)) throw RejectedInput("phase point must be finite");
  OrbitSpec orbit;
  orbit.energy = hamiltonian(target, z0);
  std::tie(orbit.x_minus, orbit.x_plus) = turning_points(target, orbit.energy);

  // With x = x_plus cos(phi), phi in [0, pi/2] covers a quarter orbit and the
  // turning-point singularity of 1/|p| cancels against dx = x_plus sin(phi) dphi.
  const double xp = orbit.x_plus;
  const double beta = target.beta();
  auto integrand = [&](double phi) {
    const double s = std::sin(phi);
    const double drop = drop_from_squares(beta, xp * std::cos(phi), xp * xp * s * s);
    return xp * s / std::sqrt(2.0 * drop);
  };

  const double half_pi = std::numbers::pi / 2;
  double previous = 4.0 * rule().integrate(integrand, 0.0, half_pi, 1);
  for (long panels = 2; panels <= (1L << 14); panels *= 2) {
    const double current = 4.0 * rule().integrate(integrand, 0.0, half_pi, panels);
    if (!std::isfinite(current)) break;
    if (std::abs(current - previous) < 1e-10 * std::abs(current)) {
      orbit.period = current;
      return orbit;
    }
    previous = current;
  }
  throw AccuracyError("period quadrature did not converge for energy " + std::to_string(orbit.energy));
}

PhasePoint1D flow(const SmoothExpFamily1D& target, PhasePoint1D z0, double t, const FlowConfig& cfg) {
  cfg.validate();
  if (!(t >= 0) || !std::isfinite(t)) throw ContractViolation("flow time must be finite and nonnegative");
  if (t == 0) return z0;
  const double tol = cfg.energy_tol * energy_scale(hamiltonian(target, z0));
  for (long n = initial_substeps(t, cfg); n <= cfg.max_substeps;) {
    PhasePoint1D z = z0;
    const double drift = walk(target, z, t / static_cast<double>(n), n, [](long, const Walker&) { return true; });
    if (drift < tol) return z;
    n = next_level(n, drift, tol, cfg.max_substeps);
  }
  throw AccuracyError("flow exceeded " + std::to_string(cfg.max_substeps) + " substeps for t = " + std::to_string(t));
}

namespace {

/// Smallest power-of-two multiple of the initial substep count whose walk
/// over one period keeps the energy drift within tolerance.
long period_substeps(const SmoothExpFamily1D& target, PhasePoint1D z0, double zeta, const FlowConfig& cfg) {
  const double tol = cfg.energy_tol * energy_scale(hamiltonian(target, z0));
  for (long n = std::max(64L, initial_substeps(zeta, cfg)); n <= cfg.max_substeps;) {
    PhasePoint1D z = z0;
    const double drift = walk(target, z, zeta / static_cast<double>(n), n, [](long, const Walker&) { return true; });
    if (drift < tol) return n;
    n = next_level(n, drift, tol, cfg.max_substeps);
  }
  throw AccuracyError("orbit walk exceeded " + std::to_string(cfg.max_substeps) + " substeps");
}

/// Orbit average of g, which reads the walker so it can reuse cached U and U'.
template <typename G>
double orbit_average(const SmoothExpFamily1D& target, PhasePoint1D z0, const G& g, const FlowConfig& cfg) {
  cfg.validate();
  const OrbitSpec orbit = period(target, z0);
  const double tol = cfg.energy_tol * energy_scale(orbit.energy);

  // Equally spaced samples over one full period: the trapezium rule for a
  // periodic integrand, so the estimate converges faster than any power of 1/n.
  // Each level is checked against a separate walk at half the substeps, which
  // sees quadrature and integrator error together.
  const auto average_at = [&](long n, double& drift) {
    PhasePoint1D z = z0;
    double sum = 0;
    drift = walk(target, z, orbit.period / static_cast<double>(n), n, [&](long, const Walker& w) {
      sum += g(w);
      return true;
    });
    return sum / static_cast<double>(n);
  };
  long previous_n = 0;
  double previous = std::numeric_limits<double>::quiet_NaN();
  for (long n = std::max(64L, initial_substeps(orbit.period, cfg)); n <= cfg.max_substeps;) {
    double drift = 0;
    const double average = average_at(n, drift);
    if (!(drift < tol)) {
      if (std::isfinite(drift)) {
        previous_n = n;
        previous = average;
      }
      n = next_level(n, drift, tol, cfg.max_substeps);
      continue;
    }
    if (n % 2 != 0) {
      previous = std::numeric_limits<double>::quiet_NaN();
    } else if (previous_n != n / 2) {
      double coarse_drift = 0;
      previous = average_at(n / 2, coarse_drift);
      if (!std::isfinite(coarse_drift)) previous = std::numeric_limits<double>::quiet_NaN();
    }
    // Fourth-order error: the finer average is off by about a fifteenth of the gap.
    if (std::abs(average - previous) / 15 <= cfg.average_tol * std::max(1.0, std::abs(average))) return average;
    previous_n = n;
    previous = average;
    n *= 2;
  }
  throw AccuracyError("microcanonical average did not converge within " + std::to_string(cfg.max_substeps) +
                      " substeps");
}

}  // namespace

double microcanonical_average(const SmoothExpFamily1D& target, PhasePoint1D z0, const PhaseFunction& f,
                              const FlowConfig& cfg) {
  return orbit_average(target, z0, [&f](const Walker& w) { return f(w.z); }, cfg);
}

double virial_residual(const SmoothExpFamily1D& target, PhasePoint1D z0, const FlowConfig& cfg) {
  const auto virial_rate = [&target](PhasePoint1D z) { return z.x * target.derivative(z.x) - z.p * z.p; };
  return std::abs(microcanonical_average(target, z0, virial_rate, cfg));
}

double dynamic_transition(const SmoothExpFamily1D& target, double x0, double p0, double fraction,
                          const FlowConfig& cfg) {
  if (!(fraction >= 0 && fraction <= 1)) throw ContractViolation("orbit fraction must lie in [0, 1]");
  const PhasePoint1D z0{x0, p0};
  const OrbitSpec orbit = period(target, z0);
  return flow(target, z0, fraction * orbit.period, cfg).x;
}

double dynamic_hmc_step(const SmoothExpFamily1D& target, double x0, RandomStream& rng, const FlowConfig& cfg) {
  if (!std::isfinite(x0)) throw RejectedInput("x0 must be finite");
  for (int attempt = 0; attempt < 64; ++attempt) {
    const double p0 = rng.normal();
    const double u = rng.uniform();
    try {
      return dynamic_transition(target, x0, p0, u, cfg);
    } catch (const DegenerateOrbit&) {
      // x0 at the minimum with p0 = 0 (to rounding): draw again.
    }
  }
  throw AccuracyError("could not draw a non-degenerate orbit");
}

double lyapunov(const SmoothExpFamily1D& target, double x) {
  // U + x U'/2 from a single pow.
  const double base = 1.0 + x * x;
  const double q = std::pow(base, target.beta() / 2);
  return q / target.beta() + x * x * q / (2 * base) + 1.0;
}

DynamicDriftEstimate dynamic_drift_estimate(const SmoothExpFamily1D& target, double x0, long n, RandomStream& rng,
                                            const FlowConfig& cfg) {
  if (n < 100) throw ContractViolation("drift estimate needs at least 100 draws");
  if (!std::isfinite(x0)) throw RejectedInput("x0 must be finite");
  const auto v = [](const Walker& w) { return w.potential + w.z.x * w.force / 2 + 1.0; };
  double mean = 0;
  double m2 = 0;
  for (long i = 0; i < n; ++i) {
    double value = 0;
    for (;;) {
      const double p0 = rng.normal();
      try {
        value = orbit_average(target, {x0, p0}, v, cfg);
        break;
      } catch (const DegenerateOrbit&) {
        // Fixed point: resample the momentum.
      }
    }
    const double d = value - mean;
    mean += d / static_cast<double>(i + 1);
    m2 += d * (value - mean);
  }
  DynamicDriftEstimate out;
  out.n = n;
  out.pv_estimate = mean;
  out.std_error = std::sqrt(m2 / static_cast<double>(n - 1) / static_cast<double>(n));
  out.predicted = target.potential(x0) + 1.5;
  return out;
}

double exhaustion_time(const SmoothExpFamily1D& target, PhasePoint1D z0, double delta, const FlowConfig& cfg) {
  cfg.validate();
  if (!(delta > 0)) throw ContractViolation("delta must be positive");
  const OrbitSpec orbit = period(target, z0);
  const long n = period_substeps(target, z0, orbit.period, cfg);
  const double h = orbit.period / static_cast<double>(n);
  const double g0 = z0.x * z0.p;

  long crossing = -1;
  PhasePoint1D before = z0;
  PhasePoint1D z = z0;
  walk(target, z, h, n + 1, [&](long k, const Walker& w) {
    if (k > 0 && std::abs(w.z.x * w.z.p - g0) >= delta) {
      crossing = k;
      return false;
    }
    before = w.z;
    return true;
  });
  if (crossing < 0) return orbit.period;

  // The threshold is crossed inside ((crossing-1) h, crossing h]; bisect on
  // the offset from the last node below it.
  double lo = 0.0;
  double hi = h;
  for (int it = 0; it < 200 && hi - lo > 1e-15 * orbit.period; ++it) {
    const double mid = lo + (hi - lo) / 2;
    if (mid <= lo || mid >= hi) break;
    const PhasePoint1D zm = flow(target, before, mid, cfg);
    (std::abs(zm.x * zm.p - g0) >= delta ? hi : lo) = mid;
  }
  return std::min(orbit.period, static_cast<double>(crossing - 1) * h + hi);
}

}  // namespace hmc_ergo::dynamic1d
