#ifndef HMC_ERGO_DIAGNOSTICS_HPP
#define HMC_ERGO_DIAGNOSTICS_HPP

#include <Eigen/Dense>

#include <string>
#include <vector>

#include "hmc_ergo/integrator.hpp"
#include "hmc_ergo/kernels.hpp"
#include "hmc_ergo/random.hpp"
#include "hmc_ergo/targets.hpp"

namespace hmc_ergo {

/// Monte Carlo mean of a per-draw quantity with its standard error.
struct McEstimate {
  double estimate = 0;
  double std_error = 0;
  long n = 0;
};

/// Estimate of PV(x0)/V(x0) for V(x) = exp(s |x|).
struct DriftEstimate {
  Eigen::VectorXd x0;
  double s = 0;
  long n = 0;
  double ratio_mean = 0;
  double ratio_stderr = 0;
};

/// Mean of exp(s (|X1| - |x0|)) over n full transitions from x0; a rejected
/// or diverged transition contributes exp(0) = 1.
DriftEstimate drift_ratio(const HmcKernelConfig& kernel, const TargetDensity<double>& target,
                          const Eigen::VectorXd& x0, double s, long n, RandomStream& rng);

/// r(x0) = 1 - E[alpha(x0, proposal)].
McEstimate rejection_prob(const HmcKernelConfig& kernel, const TargetDensity<double>& target,
                          const Eigen::VectorXd& x0, long n, RandomStream& rng);

/// Proposal mass that is both inward (|y| <= |x0|) and not surely accepted
/// (alpha < 1 - 1e-12). Diverged proposals count as outward.
McEstimate inward_rejection_mass(const HmcKernelConfig& kernel, const TargetDensity<double>& target,
                                 const Eigen::VectorXd& x0, long n, RandomStream& rng);

/// Proposal mass within distance delta of x0. Diverged proposals count as outside.
McEstimate ball_mass(const HmcKernelConfig& kernel, const TargetDensity<double>& target,
                     const Eigen::VectorXd& x0, double delta, long n, RandomStream& rng);

struct ScScanRow {
  double radius = 0;
  Eigen::VectorXd direction;
  double grad_norm = 0;
  /// <grad U, x> / (|grad U| |x|); 0 where the gradient vanishes.
  double inward_cosine = 0;
  /// |grad U| / |x|.
  double growth_ratio = 0;
};

/// Gradient norm, inward cosine and growth ratio along radius * direction.
/// Radii where the gradient is undefined are omitted from the result.
std::vector<ScScanRow> sc_scan(const TargetDensity<double>& target, const Eigen::VectorXd& direction,
                               const std::vector<double>& radii);

struct InwardAcceptance {
  double lhs = 0;
  double rhs = 0;
  bool holds = false;
};

/// Compares the potential difference minus its L-trapezium estimate against
/// (|psi|^2 - |psi^R|^2) / (2 L^2 eps^2). holds <=> the proposal is surely
/// accepted, up to rounding (lhs - rhs = -log_ratio algebraically).
InwardAcceptance inward_acceptance_check(const TargetDensity<double>& target,
                                         const Trajectory<double>& traj);

/// Max-norm of psi + psi^R - (L eps^2 / 2)(g0 + gL + 2 sum_{i=1}^{L-1} g_i).
double quadrature_identity_residual(const TargetDensity<double>& target, const Trajectory<double>& traj);

enum class TailClass { geometric, light_nongeometric, heavy_nongeometric, boundary_gaussian };

/// Classification of exp(-alpha |x|^beta) tails for fixed-time HMC.
TailClass tail_classify(double beta);
std::string to_string(TailClass c);

/// Log-spaced radii 10^{k/2}, k = 0..6 (1 to 1000).
std::vector<double> standard_radii();

/// Coordinate axes plus 8 fixed pseudo-random unit vectors.
std::vector<Eigen::VectorXd> probe_directions(Eigen::Index dim);

}  // namespace hmc_ergo

#endif  // HMC_ERGO_DIAGNOSTICS_HPP
