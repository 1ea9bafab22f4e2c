#include "hmc_ergo/kernels.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace hmc_ergo {

StepCountDistribution StepCountDistribution::fixed(int steps) {
  if (steps < 1) throw ContractViolation("fixed step count must be at least 1");
  return {Mode::fixed, steps};
}

StepCountDistribution StepCountDistribution::uniform(int max_steps) {
  if (max_steps < 1) throw ContractViolation("uniform step-count bound must be at least 1");
  return {Mode::uniform, max_steps};
}

double StepCountDistribution::prob_one() const {
  if (mode_ == Mode::uniform) return 1.0 / steps_;
  return steps_ == 1 ? 1.0 : 0.0;
}

double StepCountDistribution::mean() const {
  return mode_ == Mode::uniform ? (steps_ + 1) / 2.0 : steps_;
}

int StepCountDistribution::draw(RandomStream& rng) const {
  if (mode_ == Mode::fixed) return steps_;
  return rng.uniform_int(1, steps_);
}

void HmcKernelConfig::validate(Eigen::Index dim) const {
  if (!(epsilon > 0) || !std::isfinite(epsilon)) throw ContractViolation("kernel epsilon must be positive");
  if (mass_diag.size() == 0) return;
  if (mass_diag.size() != dim) {
    throw ContractViolation("mass_diag has length " + std::to_string(mass_diag.size()) +
                            ", target dim is " + std::to_string(dim));
  }
  if (!mass_diag.allFinite() || (mass_diag.array() <= 0).any()) {
    throw ContractViolation("mass entries must be positive and finite");
  }
}

double accept_prob(const TargetDensity<double>& target, const Trajectory<double>& traj) {
  const double delta = hamiltonian(target, traj.front()) - hamiltonian(target, traj.back());
  if (std::isnan(delta)) return 0.0;
  return delta >= 0 ? 1.0 : std::exp(delta);
}

double accept_prob(const TargetDensity<double>& target, const IntegrationResult<double>& result) {
  return result.diverged ? 0.0 : accept_prob(target, result.trajectory);
}

namespace {

ProposalRecord propose_unit_mass(const HmcKernelConfig& cfg, const TargetDensity<double>& target,
                                 const Eigen::VectorXd& x0, RandomStream& rng) {
  ProposalRecord rec;
  rec.p0 = rng.normal_vector(target.dim());
  rec.L = cfg.steps.draw(rng);

  const auto result = try_integrate(target, PhasePoint<double>{x0, rec.p0}, LeapfrogConfig{cfg.epsilon, rec.L});
  const auto& traj = result.trajectory;
  rec.proposal = traj.back().x;
  if (result.diverged) {
    rec.diverged = true;
    rec.log_ratio = -std::numeric_limits<double>::infinity();
    rec.accept_prob = 0.0;
    return rec;
  }
  rec.log_ratio = traj.energies.front() - traj.energies.back();
  rec.accept_prob = rec.log_ratio >= 0 ? 1.0 : std::exp(rec.log_ratio);
  return rec;
}

}  // namespace

ProposalRecord propose(const HmcKernelConfig& cfg, const TargetDensity<double>& target,
                       const Eigen::VectorXd& x0, RandomStream& rng) {
  cfg.validate(target.dim());
  if (x0.size() != target.dim()) throw ContractViolation("x0 dimension does not match target");
  if (!x0.allFinite()) throw RejectedInput("x0 is not finite");
  if (cfg.mass_diag.size() == 0) return propose_unit_mass(cfg, target, x0, rng);

  // Run in unit-mass coordinates y = sqrt(m) x, then map back.
  const Eigen::ArrayXd sqrt_m = cfg.mass_diag.array().sqrt();
  const auto scaled = unit_mass_view(target, cfg.mass_diag);
  const Eigen::VectorXd y0 = (sqrt_m * x0.array()).matrix();
  ProposalRecord rec = propose_unit_mass(cfg, scaled, y0, rng);
  rec.proposal = (rec.proposal.array() / sqrt_m).matrix();
  rec.p0 = (rec.p0.array() * sqrt_m).matrix();
  return rec;
}

TransitionRecord hmc_step(const HmcKernelConfig& cfg, const TargetDensity<double>& target,
                          const Eigen::VectorXd& x0, RandomStream& rng) {
  ProposalRecord prop = propose(cfg, target, x0, rng);
  const double u = rng.uniform();

  TransitionRecord rec;
  rec.x0 = x0;
  rec.p0 = std::move(prop.p0);
  rec.L = prop.L;
  rec.proposal = std::move(prop.proposal);
  rec.log_ratio = prop.log_ratio;
  rec.accept_prob = prop.accept_prob;
  rec.diverged = prop.diverged;
  // log(0) = -inf accepts every finite log_ratio.
  rec.accepted = !rec.diverged && std::log(u) < rec.log_ratio;
  rec.x1 = rec.accepted ? rec.proposal : x0;
  return rec;
}

TransitionRecord mala_step(const HmcKernelConfig& cfg, const TargetDensity<double>& target,
                           const Eigen::VectorXd& x0, RandomStream& rng) {
  HmcKernelConfig one_step = cfg;
  one_step.steps = StepCountDistribution::fixed(1);
  return hmc_step(one_step, target, x0, rng);
}

ChainResult run_chain(const HmcKernelConfig& cfg, const TargetDensity<double>& target,
                      const Eigen::VectorXd& x0, long n, RandomStream& rng,
                      const TransitionObserver& observer) {
  if (n < 1) throw ContractViolation("chain length must be at least 1");
  ChainResult out;
  out.samples.reserve(n);
  Eigen::VectorXd x = x0;
  long accepted = 0;
  long steps_total = 0;
  for (long i = 0; i < n; ++i) {
    TransitionRecord rec = hmc_step(cfg, target, x, rng);
    accepted += rec.accepted;
    out.summary.divergences += rec.diverged;
    steps_total += rec.L;
    if (observer) observer(i, rec);
    x = std::move(rec.x1);
    out.samples.push_back(x);
  }
  out.summary.n = n;
  out.summary.acceptance_rate = static_cast<double>(accepted) / n;
  out.summary.mean_steps = static_cast<double>(steps_total) / n;
  return out;
}

}  // namespace hmc_ergo
