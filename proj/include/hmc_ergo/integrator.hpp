#ifndef HMC_ERGO_INTEGRATOR_HPP
#define HMC_ERGO_INTEGRATOR_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "hmc_ergo/errors.hpp"
#include "hmc_ergo/targets.hpp"

namespace hmc_ergo {

template <typename Scalar = double>
struct PhasePoint {
  Vector<Scalar> x;
  Vector<Scalar> p;

  bool finite() const { return x.allFinite() && p.allFinite(); }
};

struct LeapfrogConfig {
  double epsilon = 0.1;
  int steps = 1;

  void validate() const {
    if (!(epsilon > 0) || !std::isfinite(epsilon)) throw ContractViolation("epsilon must be positive");
    if (steps < 1) throw ContractViolation("steps must be at least 1");
  }
};

/// The L+1 phase points of a leapfrog path; point i sits at time i * epsilon.
template <typename Scalar = double>
struct Trajectory {
  std::vector<PhasePoint<Scalar>> points;
  std::vector<Scalar> energies;
  Scalar epsilon = 0;

  int steps() const { return static_cast<int>(points.size()) - 1; }
  const PhasePoint<Scalar>& front() const { return points.front(); }
  const PhasePoint<Scalar>& back() const { return points.back(); }
};

/// Outcome of integrating until the path either completes or leaves the
/// finite range. On divergence `trajectory` holds the finite prefix.
template <typename Scalar = double>
struct IntegrationResult {
  Trajectory<Scalar> trajectory;
  bool diverged = false;
};

namespace detail {

template <typename Scalar>
void check_phase_point(const TargetDensity<Scalar>& target, const PhasePoint<Scalar>& z) {
  if (z.x.size() != target.dim() || z.p.size() != target.dim()) {
    throw ContractViolation("phase point dimension does not match target");
  }
}

}  // namespace detail

/// H(x, p) = U(x) + |p|^2 / 2 (unit mass).
template <typename Scalar>
Scalar hamiltonian(const TargetDensity<Scalar>& target, const PhasePoint<Scalar>& z) {
  detail::check_phase_point(target, z);
  return target.potential(z.x) + z.p.squaredNorm() / 2;
}

/// One half-kick / drift / half-kick step.
template <typename Scalar>
PhasePoint<Scalar> leapfrog_step(const TargetDensity<Scalar>& target, const PhasePoint<Scalar>& z,
                                 Scalar epsilon) {
  detail::check_phase_point(target, z);
  if (!(epsilon > 0)) throw ContractViolation("epsilon must be positive");
  const Vector<Scalar> p_half = z.p - (epsilon / 2) * target.gradient(z.x);
  PhasePoint<Scalar> out;
  out.x = z.x + epsilon * p_half;
  if (!out.x.allFinite()) {
    out.p = Vector<Scalar>::Constant(z.p.size(), std::numeric_limits<Scalar>::quiet_NaN());
    return out;
  }
  out.p = p_half - (epsilon / 2) * target.gradient(out.x);
  return out;
}

/// Runs L leapfrog steps, stopping at the first non-finite state.
template <typename Scalar>
IntegrationResult<Scalar> try_integrate(const TargetDensity<Scalar>& target, const PhasePoint<Scalar>& z0,
                                        const LeapfrogConfig& cfg) {
  cfg.validate();
  detail::check_phase_point(target, z0);
  if (!z0.finite()) throw RejectedInput("initial phase point is not finite");

  const Scalar eps = static_cast<Scalar>(cfg.epsilon);
  IntegrationResult<Scalar> result;
  auto& traj = result.trajectory;
  traj.epsilon = eps;
  traj.points.reserve(cfg.steps + 1);
  traj.energies.reserve(cfg.steps + 1);
  traj.points.push_back(z0);
  traj.energies.push_back(hamiltonian(target, z0));

  // The gradient at the end of one step is the gradient at the start of the next.
  Vector<Scalar> grad = target.gradient(z0.x);
  Vector<Scalar> x = z0.x;
  Vector<Scalar> p = z0.p;
  for (int i = 0; i < cfg.steps; ++i) {
    p -= (eps / 2) * grad;
    x += eps * p;
    if (!x.allFinite() || !p.allFinite()) {
      result.diverged = true;
      return result;
    }
    grad = target.gradient(x);
    p -= (eps / 2) * grad;
    if (!grad.allFinite() || !p.allFinite()) {
      result.diverged = true;
      return result;
    }
    PhasePoint<Scalar> z{x, p};
    const Scalar h = target.potential(x) + p.squaredNorm() / 2;
    if (!std::isfinite(h)) {
      result.diverged = true;
      return result;
    }
    traj.points.push_back(std::move(z));
    traj.energies.push_back(h);
  }
  return result;
}

/// As try_integrate, but a non-finite state raises TrajectoryDivergence.
template <typename Scalar>
Trajectory<Scalar> integrate(const TargetDensity<Scalar>& target, const PhasePoint<Scalar>& z0,
                             const LeapfrogConfig& cfg) {
  auto result = try_integrate(target, z0, cfg);
  if (result.diverged) throw TrajectoryDivergence(result.trajectory.steps());
  return std::move(result.trajectory);
}

/// Closed-form candidate position
///   x0 - (L eps^2 / 2) grad U(x0) - eps^2 sum_{i=1}^{L-1} (L - i) grad U(x_i) + L eps p0,
/// with the intermediate positions x_i taken from the leapfrog path.
template <typename Scalar>
Vector<Scalar> marginal_proposal(const TargetDensity<Scalar>& target, const Vector<Scalar>& x0,
                                 const Vector<Scalar>& p0, const LeapfrogConfig& cfg) {
  const auto traj = integrate(target, PhasePoint<Scalar>{x0, p0}, cfg);
  const Scalar eps = traj.epsilon;
  const int L = cfg.steps;
  Vector<Scalar> weighted = Vector<Scalar>::Zero(x0.size());
  for (int i = 1; i < L; ++i) weighted += Scalar(L - i) * target.gradient(traj.points[i].x);
  return x0 - (Scalar(L) * eps * eps / 2) * target.gradient(x0) - (eps * eps) * weighted +
         (Scalar(L) * eps) * p0;
}

/// End momentum rebuilt from the trajectory's positions:
///   p0 - (eps/2) grad U(x0) - eps sum_{i=1}^{L-1} grad U(x_i) - (eps/2) grad U(x_L).
template <typename Scalar>
Vector<Scalar> final_momentum(const TargetDensity<Scalar>& target, const Trajectory<Scalar>& traj) {
  const Scalar eps = traj.epsilon;
  const int L = traj.steps();
  Vector<Scalar> interior = Vector<Scalar>::Zero(target.dim());
  for (int i = 1; i < L; ++i) interior += target.gradient(traj.points[i].x);
  return traj.front().p - (eps / 2) * target.gradient(traj.front().x) - eps * interior -
         (eps / 2) * target.gradient(traj.back().x);
}

template <typename Scalar = double>
struct DriftPair {
  Vector<Scalar> forward;  // psi
  Vector<Scalar> reverse;  // psi^R
};

/// Forward and time-reversed gradient drifts of a trajectory:
///   psi   = (L eps^2 / 2) grad U(x0)  + eps^2 sum_{i=1}^{L-1} (L - i) grad U(x_i)
///   psi^R = (L eps^2 / 2) grad U(x_L) + eps^2 sum_{i=1}^{L-1} i grad U(x_i)
/// so that L eps p0 = x_L - x0 + psi and L eps p_L = x_L - x0 - psi^R.
template <typename Scalar>
DriftPair<Scalar> psi_drifts(const TargetDensity<Scalar>& target, const Trajectory<Scalar>& traj) {
  const Scalar eps = traj.epsilon;
  const int L = traj.steps();
  const Scalar eps2 = eps * eps;
  DriftPair<Scalar> out;
  out.forward = (Scalar(L) * eps2 / 2) * target.gradient(traj.front().x);
  out.reverse = (Scalar(L) * eps2 / 2) * target.gradient(traj.back().x);
  for (int i = 1; i < L; ++i) {
    const Vector<Scalar> g = target.gradient(traj.points[i].x);
    out.forward += (eps2 * Scalar(L - i)) * g;
    out.reverse += (eps2 * Scalar(i)) * g;
  }
  return out;
}

/// Max-norm distance to z0 after integrating forward, flipping momentum,
/// integrating back and flipping again.
template <typename Scalar>
Scalar reversibility_residual(const TargetDensity<Scalar>& target, const PhasePoint<Scalar>& z0,
                              const LeapfrogConfig& cfg) {
  const auto forward = integrate(target, z0, cfg);
  PhasePoint<Scalar> flipped{forward.back().x, -forward.back().p};
  const auto backward = integrate(target, flipped, cfg);
  const PhasePoint<Scalar> end{backward.back().x, -backward.back().p};
  return std::max((end.x - z0.x).template lpNorm<Eigen::Infinity>(),
                  (end.p - z0.p).template lpNorm<Eigen::Infinity>());
}

/// |det J - 1| for the central finite-difference Jacobian J of the L-step map.
///
/// h <= 0 selects 1e-5 * max(1, |z0|).
template <typename Scalar>
Scalar volume_residual(const TargetDensity<Scalar>& target, const PhasePoint<Scalar>& z0,
                       const LeapfrogConfig& cfg, Scalar h = Scalar(0)) {
  using std::abs;
  using std::max;
  using std::sqrt;
  const Eigen::Index d = target.dim();
  if (h <= Scalar(0)) h = Scalar(1e-5) * max(Scalar(1), sqrt(z0.x.squaredNorm() + z0.p.squaredNorm()));

  Vector<Scalar> base(2 * d);
  base << z0.x, z0.p;
  auto endpoint = [&](const Vector<Scalar>& z) {
    const auto traj = integrate(target, PhasePoint<Scalar>{z.head(d), z.tail(d)}, cfg);
    Vector<Scalar> out(2 * d);
    out << traj.back().x, traj.back().p;
    return out;
  };

  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> jac(2 * d, 2 * d);
  for (Eigen::Index j = 0; j < 2 * d; ++j) {
    Vector<Scalar> up = base;
    Vector<Scalar> down = base;
    up(j) += h;
    down(j) -= h;
    jac.col(j) = (endpoint(up) - endpoint(down)) / (2 * h);
  }
  return abs(jac.determinant() - Scalar(1));
}

}  // namespace hmc_ergo

#endif  // HMC_ERGO_INTEGRATOR_HPP
