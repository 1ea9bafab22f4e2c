#include "hmc_ergo/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hmc_ergo {

namespace {

void require_samples(long n) {
  if (n < 100) throw ContractViolation("probe sample count must be at least 100");
}

/// Running mean / standard error (Welford).
class MeanAccumulator {
 public:
  void add(double v) {
    ++n_;
    const double d = v - mean_;
    mean_ += d / n_;
    m2_ += d * (v - mean_);
  }
  double mean() const { return mean_; }
  double std_error() const { return n_ > 1 ? std::sqrt(m2_ / (n_ - 1) / n_) : 0.0; }
  long count() const { return n_; }

 private:
  long n_ = 0;
  double mean_ = 0;
  double m2_ = 0;
};

McEstimate to_estimate(const MeanAccumulator& acc) { return {acc.mean(), acc.std_error(), acc.count()}; }

}  // namespace

DriftEstimate drift_ratio(const HmcKernelConfig& kernel, const TargetDensity<double>& target,
                          const Eigen::VectorXd& x0, double s, long n, RandomStream& rng) {
  require_samples(n);
  if (!(s > 0)) throw ContractViolation("Lyapunov rate s must be positive");
  const double r0 = x0.norm();
  MeanAccumulator acc;
  for (long i = 0; i < n; ++i) {
    const TransitionRecord rec = hmc_step(kernel, target, x0, rng);
    acc.add(rec.accepted ? std::exp(s * (rec.x1.norm() - r0)) : 1.0);
  }
  return {x0, s, n, acc.mean(), acc.std_error()};
}

McEstimate rejection_prob(const HmcKernelConfig& kernel, const TargetDensity<double>& target,
                          const Eigen::VectorXd& x0, long n, RandomStream& rng) {
  require_samples(n);
  MeanAccumulator acc;
  for (long i = 0; i < n; ++i) acc.add(1.0 - propose(kernel, target, x0, rng).accept_prob);
  return to_estimate(acc);
}

McEstimate inward_rejection_mass(const HmcKernelConfig& kernel, const TargetDensity<double>& target,
                                 const Eigen::VectorXd& x0, long n, RandomStream& rng) {
  require_samples(n);
  const double r0 = x0.norm();
  MeanAccumulator acc;
  for (long i = 0; i < n; ++i) {
    const ProposalRecord rec = propose(kernel, target, x0, rng);
    const bool inward = !rec.diverged && rec.proposal.norm() <= r0;
    const bool may_reject = rec.accept_prob < 1.0 - 1e-12;
    acc.add(inward && may_reject ? 1.0 : 0.0);
  }
  return to_estimate(acc);
}

McEstimate ball_mass(const HmcKernelConfig& kernel, const TargetDensity<double>& target,
                     const Eigen::VectorXd& x0, double delta, long n, RandomStream& rng) {
  require_samples(n);
  if (!(delta > 0)) throw ContractViolation("ball radius must be positive");
  MeanAccumulator acc;
  for (long i = 0; i < n; ++i) {
    const ProposalRecord rec = propose(kernel, target, x0, rng);
    acc.add(!rec.diverged && (rec.proposal - x0).norm() < delta ? 1.0 : 0.0);
  }
  return to_estimate(acc);
}

std::vector<ScScanRow> sc_scan(const TargetDensity<double>& target, const Eigen::VectorXd& direction,
                               const std::vector<double>& radii) {
  if (direction.size() != target.dim()) throw ContractViolation("direction dimension does not match target");
  const double dn = direction.norm();
  if (!(dn > 0)) throw ContractViolation("direction must be non-zero");
  const Eigen::VectorXd unit = direction / dn;
  if (!std::is_sorted(radii.begin(), radii.end())) throw ContractViolation("radii must be increasing");

  std::vector<ScScanRow> rows;
  rows.reserve(radii.size());
  for (double r : radii) {
    if (!(r > 0)) throw ContractViolation("radii must be positive");
    const Eigen::VectorXd x = r * unit;
    Eigen::VectorXd g;
    try {
      g = target.gradient(x);
    } catch (const DomainError&) {
      continue;
    }
    if (!g.allFinite()) continue;
    ScScanRow row;
    row.radius = r;
    row.direction = unit;
    row.grad_norm = g.norm();
    row.inward_cosine = row.grad_norm > 0 ? std::clamp(g.dot(x) / (row.grad_norm * r), -1.0, 1.0) : 0.0;
    row.growth_ratio = row.grad_norm / r;
    rows.push_back(std::move(row));
  }
  return rows;
}

InwardAcceptance inward_acceptance_check(const TargetDensity<double>& target, const Trajectory<double>& traj) {
  const int L = traj.steps();
  if (L < 1) throw ContractViolation("trajectory needs at least one step");
  const double eps = traj.epsilon;
  const Eigen::VectorXd& x0 = traj.front().x;
  const Eigen::VectorXd& xL = traj.back().x;

  Eigen::VectorXd gradient_sum = target.gradient(x0) + target.gradient(xL);
  for (int i = 1; i < L; ++i) gradient_sum += 2.0 * target.gradient(traj.points[i].x);
  const double trapezium = (xL - x0).dot(gradient_sum) / (2.0 * L);

  const auto psi = psi_drifts(target, traj);
  InwardAcceptance out;
  out.lhs = (target.potential(xL) - target.potential(x0)) - trapezium;
  out.rhs = (psi.forward.squaredNorm() - psi.reverse.squaredNorm()) / (2.0 * L * L * eps * eps);
  out.holds = out.lhs <= out.rhs;
  return out;
}

double quadrature_identity_residual(const TargetDensity<double>& target, const Trajectory<double>& traj) {
  const int L = traj.steps();
  const double eps = traj.epsilon;
  const auto psi = psi_drifts(target, traj);
  Eigen::VectorXd gradient_sum = target.gradient(traj.front().x) + target.gradient(traj.back().x);
  for (int i = 1; i < L; ++i) gradient_sum += 2.0 * target.gradient(traj.points[i].x);
  const Eigen::VectorXd rhs = (L * eps * eps / 2.0) * gradient_sum;
  return (psi.forward + psi.reverse - rhs).lpNorm<Eigen::Infinity>();
}

TailClass tail_classify(double beta) {
  if (!(beta > 0) || !std::isfinite(beta)) throw ContractViolation("beta must be positive");
  if (beta < 1) return TailClass::heavy_nongeometric;
  if (beta < 2) return TailClass::geometric;
  if (beta == 2) return TailClass::boundary_gaussian;
  return TailClass::light_nongeometric;
}

std::string to_string(TailClass c) {
  switch (c) {
    case TailClass::geometric:
      return "geometric";
    case TailClass::light_nongeometric:
      return "light_nongeometric";
    case TailClass::heavy_nongeometric:
      return "heavy_nongeometric";
    case TailClass::boundary_gaussian:
      return "boundary_gaussian";
  }
  throw std::logic_error("unknown tail class");
}

std::vector<double> standard_radii() {
  std::vector<double> radii;
  for (int k = 0; k <= 6; ++k) radii.push_back(std::pow(10.0, k / 2.0));
  return radii;
}

std::vector<Eigen::VectorXd> probe_directions(Eigen::Index dim) {
  if (dim < 1) throw ContractViolation("dimension must be positive");
  std::vector<Eigen::VectorXd> dirs;
  for (Eigen::Index i = 0; i < dim; ++i) dirs.push_back(Eigen::VectorXd::Unit(dim, i));
  RandomStream rng(0x5eed'd1c0ULL, static_cast<std::uint64_t>(dim));
  while (dirs.size() < static_cast<std::size_t>(dim + 8)) {
    Eigen::VectorXd v = rng.normal_vector(dim);
    const double n = v.norm();
    if (n > 1e-8) dirs.push_back(v / n);
  }
  return dirs;
}

}  // namespace hmc_ergo
