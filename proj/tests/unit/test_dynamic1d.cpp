#include <gtest/gtest.h>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <cmath>
#include <numbers>

#include "hmc_ergo/dynamic1d.hpp"
#include "hmc_ergo/errors.hpp"

using namespace hmc_ergo;
using namespace hmc_ergo::dynamic1d;

namespace {

constexpr double kPi = std::numbers::pi;

// Phase point at the right turning point of the orbit with the given x_plus.
PhasePoint1D turning(double x_plus) { return {x_plus, 0.0}; }

// Time at which p changes sign from + to - near t_guess, found by bisecting
// flow output; this detects the return to the right turning point.
double return_time(const SmoothExpFamily1D& t, PhasePoint1D z0, double lo, double hi) {
  for (int i = 0; i < 60; ++i) {
    const double mid = (lo + hi) / 2;
    (flow(t, z0, mid).p > 0 ? lo : hi) = mid;
  }
  return (lo + hi) / 2;
}

}  // namespace

TEST(Target, PotentialAndDerivative) {
  const SmoothExpFamily1D t(0.5);
  EXPECT_DOUBLE_EQ(t.potential(0), 2.0);
  EXPECT_DOUBLE_EQ(t.potential(std::sqrt(15.0)), 4.0);
  const double x = 1.7;
  const double h = 1e-5;
  EXPECT_NEAR(t.derivative(x), (t.potential(x + h) - t.potential(x - h)) / (2 * h), 1e-9);
  EXPECT_NEAR(t.potential_drop(3.0, 1.0), t.potential(3.0) - t.potential(1.0), 1e-14);
  EXPECT_THROW(t.potential_drop(1.0, 3.0), ContractViolation);
  EXPECT_THROW(SmoothExpFamily1D(0.0), ContractViolation);
}

TEST(TurningPoints, Examples) {
  const auto [lo2, hi2] = turning_points(SmoothExpFamily1D(2), 2.5);
  EXPECT_NEAR(hi2, 2.0, 1e-14);
  EXPECT_EQ(lo2, -hi2);
  const auto tiny = turning_points(SmoothExpFamily1D(1), 1 + 1e-12);
  EXPECT_LT(tiny.second, 1e-5);
  EXPECT_GT(tiny.second, 0.0);
  EXPECT_NEAR(turning_points(SmoothExpFamily1D(0.5), 4.0).second, std::sqrt(15.0), 1e-13);
}

TEST(TurningPoints, DegenerateAtMinimum) {
  EXPECT_THROW(turning_points(SmoothExpFamily1D(2), 0.5), DegenerateOrbit);
  EXPECT_THROW(turning_points(SmoothExpFamily1D(2), 0.1), DegenerateOrbit);
  EXPECT_THROW(period(SmoothExpFamily1D(1), {0.0, 0.0}), DegenerateOrbit);
}

TEST(Period, HarmonicIsTwoPi) {
  const SmoothExpFamily1D t(2);
  for (PhasePoint1D z : {PhasePoint1D{2, 0}, PhasePoint1D{0.1, -3}, PhasePoint1D{50, 7}, PhasePoint1D{1e-3, 0}}) {
    EXPECT_NEAR(period(t, z).period, 2 * kPi, 1e-10);
  }
  const auto orbit = period(t, {2, 0});
  EXPECT_DOUBLE_EQ(orbit.energy, 2.5);
  EXPECT_NEAR(orbit.x_plus, 2.0, 1e-14);
  EXPECT_NEAR(orbit.x_minus, -2.0, 1e-14);
}

TEST(Period, MatchesReturnTime) {
  const SmoothExpFamily1D t(1);
  const PhasePoint1D z0{10, 0};
  const double zeta = period(t, z0).period;
  EXPECT_NEAR(return_time(t, z0, 0.9 * zeta, 1.1 * zeta), zeta, 1e-6);
}

TEST(Flow, ZeroTimeIsIdentity) {
  const SmoothExpFamily1D t(1.5);
  const auto z = flow(t, {0.3, -0.8}, 0.0);
  EXPECT_EQ(z.x, 0.3);
  EXPECT_EQ(z.p, -0.8);
}

TEST(Flow, HarmonicHalfPeriod) {
  const auto z = flow(SmoothExpFamily1D(2), {2, 0}, kPi);
  EXPECT_NEAR(z.x, -2.0, 1e-8);
  EXPECT_NEAR(z.p, 0.0, 1e-8);
}

TEST(Flow, HarmonicClosedForm) {
  const SmoothExpFamily1D t(2);
  for (double time : {0.1, 1.0, 2.5, 7.0}) {
    const auto z = flow(t, {1.5, 0.5}, time);
    EXPECT_NEAR(z.x, 1.5 * std::cos(time) + 0.5 * std::sin(time), 1e-8);
    EXPECT_NEAR(z.p, -1.5 * std::sin(time) + 0.5 * std::cos(time), 1e-8);
  }
}

TEST(Flow, PeriodReturnAndEnergyGrid) {
  const FlowConfig cfg;
  for (double beta : {0.5, 1.0, 2.0, 4.0}) {
    const SmoothExpFamily1D t(beta);
    for (double xp : {1.0, 5.0, 20.0}) {
      const PhasePoint1D z0 = turning(xp);
      const double zeta = period(t, z0).period;
      const auto back = flow(t, z0, zeta, cfg);
      EXPECT_LE(std::hypot(back.x - z0.x, back.p - z0.p), 1e-6 * std::max(1.0, xp)) << beta << " " << xp;
      const double h0 = hamiltonian(t, z0);
      for (double frac : {0.1, 0.37, 0.5, 0.81}) {
        const auto z = flow(t, z0, frac * zeta, cfg);
        EXPECT_LE(std::abs(hamiltonian(t, z) - h0), cfg.energy_tol * std::max(1.0, std::abs(h0)));
      }
    }
  }
}

TEST(Flow, RejectsNegativeTime) {
  EXPECT_THROW(flow(SmoothExpFamily1D(2), {1, 0}, -1.0), ContractViolation);
  FlowConfig bad;
  bad.energy_tol = 0;
  EXPECT_THROW(flow(SmoothExpFamily1D(2), {1, 0}, 1.0, bad), ContractViolation);
}

TEST(Flow, SubstepBudgetExhaustion) {
  FlowConfig tight;
  tight.energy_tol = 1e-17;
  tight.max_substeps = 1 << 10;
  EXPECT_THROW(flow(SmoothExpFamily1D(4), {20, 0}, 5.0, tight), AccuracyError);
}

TEST(Microcanonical, Normalization) {
  const SmoothExpFamily1D t(1.5);
  EXPECT_NEAR(microcanonical_average(t, {2, 0.5}, [](PhasePoint1D) { return 1.0; }), 1.0, 1e-14);
}

TEST(Microcanonical, EnergyIsConserved) {
  const SmoothExpFamily1D t(0.5);
  const PhasePoint1D z0{3, -1};
  const double avg = microcanonical_average(t, z0, [&](PhasePoint1D z) { return hamiltonian(t, z); });
  EXPECT_NEAR(avg, hamiltonian(t, z0), 1e-8);
}

TEST(Microcanonical, HarmonicKineticAverage) {
  const double avg = microcanonical_average(SmoothExpFamily1D(2), {1, 1}, [](PhasePoint1D z) { return z.p * z.p; });
  EXPECT_NEAR(avg, 1.0, 1e-8);
}

TEST(Microcanonical, AgreesWithQuadrature) {
  // <p^2> over an orbit equals (1/zeta) * 4 * int_0^{x+} |p| dx by the change of
  // variables dt = dx / |p|; the integral is taken independently with Boost.
  const SmoothExpFamily1D t(1);
  const PhasePoint1D z0{6, 0};
  const double H = hamiltonian(t, z0);
  const double zeta = period(t, z0).period;
  boost::math::quadrature::tanh_sinh<double> integrator;
  const double integral = integrator.integrate(
      [&](double x) { return std::sqrt(std::max(0.0, 2 * (H - t.potential(x)))); }, 0.0, 6.0);
  const double expected = 4 * integral / zeta;
  const double avg = microcanonical_average(t, z0, [](PhasePoint1D z) { return z.p * z.p; });
  EXPECT_NEAR(avg, expected, 1e-6 * expected);
}

TEST(Virial, Examples) {
  EXPECT_LE(virial_residual(SmoothExpFamily1D(2), {1, 1}), 1e-7);
  EXPECT_LE(virial_residual(SmoothExpFamily1D(0.5), {5, 0.3}), 1e-6);
  EXPECT_LE(virial_residual(SmoothExpFamily1D(1), {10, 0}), 1e-6);
}

TEST(DynamicStep, FullPeriodReturns) {
  const SmoothExpFamily1D t(2);
  for (double p0 : {0.3, -1.2, 2.0}) EXPECT_NEAR(dynamic_transition(t, 0.0, p0, 1.0), 0.0, 1e-8);
  EXPECT_THROW(dynamic_transition(t, 0.0, 1.0, 1.5), ContractViolation);
}

TEST(DynamicStep, ResamplesDegenerateOrbit) {
  // From the minimum only p0 = 0 is degenerate; a step must still return.
  RandomStream rng(1);
  const double x = dynamic_hmc_step(SmoothExpFamily1D(2), 0.0, rng);
  EXPECT_TRUE(std::isfinite(x));
}

TEST(DynamicStep, HarmonicVarianceAgainstQuadrature) {
  boost::math::quadrature::exp_sinh<double> integrator;
  const SmoothExpFamily1D t(2);
  auto density = [&](double x) { return std::exp(-t.potential(x)); };
  const double z = integrator.integrate(density);
  const double var = integrator.integrate([&](double x) { return x * x * density(x); }) / z;

  RandomStream rng(42);
  const int n = 100000;
  const int batches = 50;
  std::vector<double> batch_sq(batches, 0.0);
  double x = 0;
  double sum_sq = 0;
  for (int i = 0; i < n; ++i) {
    x = dynamic_hmc_step(t, x, rng);
    sum_sq += x * x;
    batch_sq[i / (n / batches)] += x * x / (n / batches);
  }
  double mu = 0;
  for (double b : batch_sq) mu += b / batches;
  double s2 = 0;
  for (double b : batch_sq) s2 += (b - mu) * (b - mu) / (batches - 1);
  const double se = std::sqrt(s2 / batches);
  EXPECT_NEAR(sum_sq / n, var, 3 * se);
}

TEST(DynamicStep, HeavyTailRecovery) {
  const SmoothExpFamily1D t(0.5);
  int recovered = 0;
  for (int rep = 0; rep < 20; ++rep) {
    RandomStream rng(7, rep);
    double x = 1000;
    for (int i = 0; i < 1000 && std::abs(x) >= 10; ++i) x = dynamic_hmc_step(t, x, rng);
    recovered += std::abs(x) < 10;
  }
  EXPECT_GE(recovered, 19);
}

TEST(Lyapunov, Form) {
  const SmoothExpFamily1D t(2);
  // U + x U'/2 + 1 with U = (1 + x^2)/2, U' = x.
  EXPECT_DOUBLE_EQ(lyapunov(t, 2.0), 2.5 + 2.0 + 1.0);
}

TEST(DriftEstimate, HarmonicClosedForm) {
  const SmoothExpFamily1D t(2);
  RandomStream rng(3);
  const auto est = dynamic_drift_estimate(t, 2.0, 2000, rng);
  EXPECT_DOUBLE_EQ(est.predicted, 4.0);
  EXPECT_NEAR(est.pv_estimate, 4.0, 3 * est.std_error);
  RandomStream rng0(4);
  EXPECT_DOUBLE_EQ(dynamic_drift_estimate(t, 0.0, 100, rng0).predicted, 2.0);
}

TEST(DriftEstimate, PerOrbitAverageIsEnergyPlusOne) {
  // By the virial identity, <V> = H + 1 on every orbit.
  for (double beta : {0.5, 1.0, 4.0}) {
    const SmoothExpFamily1D t(beta);
    const PhasePoint1D z0{3, 0.7};
    const double avg = microcanonical_average(t, z0, [&](PhasePoint1D z) { return lyapunov(t, z.x); });
    EXPECT_NEAR(avg, hamiltonian(t, z0) + 1, 1e-7 * std::max(1.0, avg));
  }
}

TEST(DriftEstimate, SelfConsistency) {
  RandomStream rng(5);
  const auto est = dynamic_drift_estimate(SmoothExpFamily1D(1), 5.0, 10000, rng);
  EXPECT_LE(std::abs(est.pv_estimate - est.predicted), 3 * est.std_error);
}

TEST(Exhaustion, HarmonicClosedForm) {
  EXPECT_NEAR(exhaustion_time(SmoothExpFamily1D(2), {2, 0}, 1.0), kPi / 12, 1e-9);
}

TEST(Exhaustion, NeverTriggeredReturnsPeriod) {
  const SmoothExpFamily1D t(2);
  // |x p| <= H on a harmonic orbit, so delta = 2.1 H is never reached from x p = 0.
  EXPECT_DOUBLE_EQ(exhaustion_time(t, {2, 0}, 10.0), period(t, {2, 0}).period);
}

TEST(Exhaustion, ShrinksWithDelta) {
  const SmoothExpFamily1D t(1.5);
  double previous = exhaustion_time(t, {3, 0.5}, 1.0);
  for (double delta : {0.1, 1e-2, 1e-3, 1e-5}) {
    const double now = exhaustion_time(t, {3, 0.5}, delta);
    EXPECT_LT(now, previous);
    EXPECT_GT(now, 0.0);
    previous = now;
  }
  EXPECT_LT(previous, 1e-4);
}
