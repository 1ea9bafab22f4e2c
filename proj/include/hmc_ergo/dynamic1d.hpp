#ifndef HMC_ERGO_DYNAMIC1D_HPP
#define HMC_ERGO_DYNAMIC1D_HPP

#include <functional>
#include <utility>

#include "hmc_ergo/random.hpp"

namespace hmc_ergo::dynamic1d {

/// U(x) = (1 + x^2)^(beta/2) / beta on the real line.
class SmoothExpFamily1D {
 public:
  explicit SmoothExpFamily1D(double beta);

  double beta() const { return beta_; }
  double potential(double x) const;
  double derivative(double x) const;
  double minimum() const { return 1.0 / beta_; }

  /// U(outer) - U(inner) for |inner| <= |outer|, computed without cancellation.
  double potential_drop(double outer, double inner) const;

 private:
  double beta_;
};

struct PhasePoint1D {
  double x = 0;
  double p = 0;
};

double hamiltonian(const SmoothExpFamily1D& target, PhasePoint1D z);

/// Closed orbit through a phase point: energy, turning points and period.
struct OrbitSpec {
  double energy = 0;
  double x_minus = 0;
  double x_plus = 0;
  double period = 0;
};

/// Accuracy knobs for the surrogate exact flow.
struct FlowConfig {
  /// Energy drift allowed along a flow, relative to max(1, |H|).
  double energy_tol = 1e-10;
  /// Estimated error allowed in an orbit average, relative to max(1, |avg|);
  /// the estimate is the gap to the half-substep average over 15.
  double average_tol = 1e-8;
  /// Substep length tried first; halved until energy_tol holds.
  double initial_step = 0.02;
  long max_substeps = 1L << 24;

  void validate() const;
};

/// Turning points of the level set U(x) = H, x_minus = -x_plus.
std::pair<double, double> turning_points(const SmoothExpFamily1D& target, double energy);

/// Energy, turning points and period of the orbit through z0.
OrbitSpec period(const SmoothExpFamily1D& target, PhasePoint1D z0);

/// Advances Hamilton's equations by time t with a fourth-order symplectic
/// composition, refining the substep until the energy drift meets tolerance.
PhasePoint1D flow(const SmoothExpFamily1D& target, PhasePoint1D z0, double t, const FlowConfig& cfg = {});

using PhaseFunction = std::function<double(PhasePoint1D)>;

/// Time average of f over one period of the orbit through z0.
double microcanonical_average(const SmoothExpFamily1D& target, PhasePoint1D z0, const PhaseFunction& f,
                              const FlowConfig& cfg = {});

/// |<x U'(x)> - <p^2>| over the orbit through z0; zero for exact dynamics.
double virial_residual(const SmoothExpFamily1D& target, PhasePoint1D z0, const FlowConfig& cfg = {});

/// Position after flowing the orbit through (x0, p0) for fraction * period.
double dynamic_transition(const SmoothExpFamily1D& target, double x0, double p0, double fraction,
                          const FlowConfig& cfg = {});

/// One step of the position-dependent-time sampler: p0 ~ N(0,1),
/// tau ~ U[0, period], x <- position after flowing for tau. No accept/reject.
double dynamic_hmc_step(const SmoothExpFamily1D& target, double x0, RandomStream& rng,
                        const FlowConfig& cfg = {});

/// Lyapunov function V(x) = U(x) + x U'(x) / 2 + 1.
double lyapunov(const SmoothExpFamily1D& target, double x);

struct DynamicDriftEstimate {
  double pv_estimate = 0;
  double std_error = 0;
  double predicted = 0;
  long n = 0;
};

/// Monte Carlo estimate of PV(x0) = E_p0[<V>] against the prediction U(x0) + 3/2.
DynamicDriftEstimate dynamic_drift_estimate(const SmoothExpFamily1D& target, double x0, long n,
                                            RandomStream& rng, const FlowConfig& cfg = {});

/// First time t in (0, period] with |x_t p_t - x_0 p_0| >= delta, or the
/// period if the virial never moves that far.
double exhaustion_time(const SmoothExpFamily1D& target, PhasePoint1D z0, double delta,
                       const FlowConfig& cfg = {});

}  // namespace hmc_ergo::dynamic1d

#endif  // HMC_ERGO_DYNAMIC1D_HPP
