#ifndef HMC_ERGO_KERNELS_HPP
#define HMC_ERGO_KERNELS_HPP

#include <Eigen/Dense>

#include <functional>
#include <vector>

#include "hmc_ergo/integrator.hpp"
#include "hmc_ergo/random.hpp"
#include "hmc_ergo/targets.hpp"

namespace hmc_ergo {

/// Law of the leapfrog step count. Only bounded laws with P[L = 1] > 0 are
/// representable: fixed(L) and uniform on {1, ..., Lmax}.
class StepCountDistribution {
 public:
  enum class Mode { fixed, uniform };

  static StepCountDistribution fixed(int steps);
  static StepCountDistribution uniform(int max_steps);

  Mode mode() const { return mode_; }
  int max_steps() const { return steps_; }
  double prob_one() const;
  double mean() const;

  /// Fixed mode consumes no randomness.
  int draw(RandomStream& rng) const;

  friend bool operator==(const StepCountDistribution&, const StepCountDistribution&) = default;

 private:
  StepCountDistribution(Mode mode, int steps) : mode_(mode), steps_(steps) {}

  Mode mode_;
  int steps_;
};

struct HmcKernelConfig {
  double epsilon = 0.1;
  StepCountDistribution steps = StepCountDistribution::fixed(1);
  /// Empty means unit mass.
  Eigen::VectorXd mass_diag;

  void validate(Eigen::Index dim) const;
};

/// One proposal: momentum and step-count draw, the integrated candidate and
/// its acceptance probability. No accept/reject decision.
struct ProposalRecord {
  Eigen::VectorXd p0;
  int L = 0;
  /// Candidate position; on divergence, the last finite position reached.
  Eigen::VectorXd proposal;
  /// H(z0) - H(z_L); -inf on divergence.
  double log_ratio = 0;
  double accept_prob = 0;
  bool diverged = false;
};

struct TransitionRecord {
  Eigen::VectorXd x0;
  Eigen::VectorXd p0;
  int L = 0;
  Eigen::VectorXd proposal;
  double log_ratio = 0;
  double accept_prob = 0;
  bool accepted = false;
  Eigen::VectorXd x1;
  bool diverged = false;
};

/// min(1, exp(H(z0) - H(z_L))) for a finite trajectory.
double accept_prob(const TargetDensity<double>& target, const Trajectory<double>& traj);

/// As above; a diverged integration has acceptance probability 0.
double accept_prob(const TargetDensity<double>& target, const IntegrationResult<double>& result);

/// Draws p0 (then L) and integrates. Consumes the stream exactly as the
/// first part of hmc_step.
ProposalRecord propose(const HmcKernelConfig& cfg, const TargetDensity<double>& target,
                       const Eigen::VectorXd& x0, RandomStream& rng);

/// One Metropolis-adjusted HMC transition. Draw order: p0, L, u.
TransitionRecord hmc_step(const HmcKernelConfig& cfg, const TargetDensity<double>& target,
                          const Eigen::VectorXd& x0, RandomStream& rng);

/// hmc_step with the step count pinned to one (MALA).
TransitionRecord mala_step(const HmcKernelConfig& cfg, const TargetDensity<double>& target,
                           const Eigen::VectorXd& x0, RandomStream& rng);

struct ChainSummary {
  long n = 0;
  double acceptance_rate = 0;
  long divergences = 0;
  double mean_steps = 0;
};

struct ChainResult {
  std::vector<Eigen::VectorXd> samples;
  ChainSummary summary;
};

using TransitionObserver = std::function<void(long iteration, const TransitionRecord&)>;

/// Iterates hmc_step n times from x0. samples[i] is the state after step i.
ChainResult run_chain(const HmcKernelConfig& cfg, const TargetDensity<double>& target,
                      const Eigen::VectorXd& x0, long n, RandomStream& rng,
                      const TransitionObserver& observer = {});

}  // namespace hmc_ergo

#endif  // HMC_ERGO_KERNELS_HPP
