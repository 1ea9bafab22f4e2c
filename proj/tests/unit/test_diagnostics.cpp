#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "hmc_ergo/diagnostics.hpp"
#include "hmc_ergo/errors.hpp"

using namespace hmc_ergo;

namespace {

Eigen::VectorXd scalar_vec(double v) { return Eigen::VectorXd::Constant(1, v); }

HmcKernelConfig kernel(double eps, StepCountDistribution steps) {
  HmcKernelConfig cfg;
  cfg.epsilon = eps;
  cfg.steps = steps;
  return cfg;
}

TargetDensity<double> expfam(double alpha, double beta, double kappa, Eigen::Index dim = 1) {
  return ExpFamilyTarget{alpha, beta, kappa, dim}.to_target();
}

const auto kGauss = GaussianTarget::standard(1).to_target();

}  // namespace

TEST(DriftRatio, TinyStepIsNeutral) {
  RandomStream rng(1);
  const auto d = drift_ratio(kernel(1e-6, StepCountDistribution::fixed(3)), expfam(1, 1.5, 1), scalar_vec(20), 0.1,
                             2000, rng);
  EXPECT_NEAR(d.ratio_mean, 1.0, 1e-5);
}

TEST(DriftRatio, GeometricRegimeContracts) {
  RandomStream rng(2);
  const auto d = drift_ratio(kernel(0.5, StepCountDistribution::uniform(5)), expfam(1, 1.5, 1), scalar_vec(50), 0.1,
                             10000, rng);
  EXPECT_LT(d.ratio_mean, 0.95);
  EXPECT_LT(d.ratio_stderr, 0.01);
  EXPECT_EQ(d.n, 10000);
  EXPECT_EQ(d.s, 0.1);
}

TEST(DriftRatio, HeavyTailApproachesOne) {
  const auto t = expfam(1, 0.5, 1);
  const auto cfg = kernel(0.5, StepCountDistribution::uniform(5));
  std::vector<double> ratios;
  for (double x0 : {10.0, 50.0, 200.0}) {
    RandomStream rng(3);  // common random numbers across x0
    ratios.push_back(drift_ratio(cfg, t, scalar_vec(x0), 0.1, 10000, rng).ratio_mean);
  }
  EXPECT_LE(ratios[0], ratios[1]);
  EXPECT_LE(ratios[1], ratios[2]);
  EXPECT_GT(ratios[2], 0.99);
}

TEST(DriftRatio, GaussianBoundary) {
  // alpha = 1/2, so eps < 1/(2 alpha) = 1.
  RandomStream rng(4);
  const auto d =
      drift_ratio(kernel(0.5, StepCountDistribution::uniform(5)), kGauss, scalar_vec(50), 0.1, 2000, rng);
  EXPECT_LT(d.ratio_mean, 1.0);
}

TEST(DriftRatio, RejectsBadArguments) {
  RandomStream rng(0);
  const auto cfg = kernel(0.1, StepCountDistribution::fixed(1));
  EXPECT_THROW(drift_ratio(cfg, kGauss, scalar_vec(1), 0.0, 1000, rng), ContractViolation);
  EXPECT_THROW(drift_ratio(cfg, kGauss, scalar_vec(1), 0.1, 10, rng), ContractViolation);
}

TEST(RejectionProb, EnergyConservingIsZero) {
  RandomStream rng(5);
  const auto est = rejection_prob(kernel(0.4, StepCountDistribution::uniform(4)), flat_target(2),
                                  Eigen::Vector2d(1, 1), 500, rng);
  EXPECT_EQ(est.estimate, 0.0);
}

TEST(RejectionProb, LightTailAlwaysRejects) {
  RandomStream rng(6);
  const auto est =
      rejection_prob(kernel(0.2, StepCountDistribution::fixed(10)), expfam(1, 4, 0), scalar_vec(10), 1000, rng);
  EXPECT_GT(est.estimate, 0.99);
}

TEST(RejectionProb, StableHarmonicRegime) {
  RandomStream rng(7);
  const auto est =
      rejection_prob(kernel(0.5, StepCountDistribution::fixed(5)), kGauss, scalar_vec(1), 10000, rng);
  EXPECT_LT(est.estimate, 0.2);
}

TEST(InwardRejection, EnergyConservingIsZero) {
  RandomStream rng(8);
  const auto est = inward_rejection_mass(kernel(0.4, StepCountDistribution::fixed(4)), flat_target(1),
                                         scalar_vec(3), 500, rng);
  EXPECT_EQ(est.estimate, 0.0);
}

TEST(InwardRejection, LogConcaveTail) {
  RandomStream rng(9);
  const auto est = inward_rejection_mass(kernel(0.5, StepCountDistribution::uniform(5)), expfam(1, 1.5, 1),
                                         scalar_vec(100), 10000, rng);
  EXPECT_LT(est.estimate, 0.05);
}

TEST(InwardRejection, LightTailRejectionsAreOutward) {
  RandomStream rng(10);
  const auto est = inward_rejection_mass(kernel(0.2, StepCountDistribution::fixed(10)), expfam(1, 4, 0),
                                         scalar_vec(10), 1000, rng);
  EXPECT_LT(est.estimate, 0.01);
}

TEST(BallMass, TinyStepStaysLocal) {
  RandomStream rng(11);
  const auto est = ball_mass(kernel(1e-6, StepCountDistribution::fixed(2)), expfam(1, 1.5, 1), scalar_vec(4), 0.01,
                             1000, rng);
  EXPECT_EQ(est.estimate, 1.0);
}

TEST(BallMass, BoundedGradientDisplacement) {
  const double eps = 0.5;
  const int L = 5;
  const double M = 1.0;
  const double delta = L * eps * eps * M / 2 + eps * eps * L * (L - 1) * M / 2 + L * eps * 3;
  for (double x0 : {10.0, 100.0, 1000.0}) {
    RandomStream rng(12);
    const auto est = ball_mass(kernel(eps, StepCountDistribution::fixed(L)), expfam(1, 0.5, 1), scalar_vec(x0), delta,
                               10000, rng);
    EXPECT_GT(est.estimate, 0.99) << "x0=" << x0;
  }
}

TEST(BallMass, OscillatorMovesFar) {
  RandomStream rng(13);
  const auto est =
      ball_mass(kernel(1.0, StepCountDistribution::fixed(5)), kGauss, scalar_vec(5), 0.1, 2000, rng);
  EXPECT_LT(est.estimate, 0.2);
}

TEST(ScScan, Gaussian) {
  const auto rows = sc_scan(kGauss, scalar_vec(1), {1, 10, 100});
  ASSERT_EQ(rows.size(), 3u);
  const double expected[] = {1, 10, 100};
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_DOUBLE_EQ(rows[i].grad_norm, expected[i]);
    EXPECT_DOUBLE_EQ(rows[i].inward_cosine, 1.0);
    EXPECT_DOUBLE_EQ(rows[i].growth_ratio, 1.0);
  }
}

TEST(ScScan, GrowthTrendsMatchClassification) {
  const auto radii = standard_radii();
  for (const auto& dir : probe_directions(2)) {
    const auto sub = sc_scan(expfam(1, 1.5, 1, 2), dir, radii);
    for (std::size_t i = 1; i < sub.size(); ++i) EXPECT_LT(sub[i].growth_ratio, sub[i - 1].growth_ratio);
    EXPECT_LT(sub.back().growth_ratio, 0.05);

    const auto super = sc_scan(expfam(1, 4, 0, 2), dir, radii);
    for (std::size_t i = 1; i < super.size(); ++i) EXPECT_GT(super[i].growth_ratio, super[i - 1].growth_ratio);
    EXPECT_NEAR(super.back().growth_ratio, 4e6, 1e-6 * 4e6);

    const double alpha = 0.7;
    const auto boundary = sc_scan(expfam(alpha, 2, 1, 2), dir, radii);
    EXPECT_NEAR(boundary.back().growth_ratio, 2 * alpha, 0.1 * 2 * alpha);

    for (const auto* rows : {&sub, &super, &boundary}) EXPECT_NEAR(rows->back().inward_cosine, 1.0, 0.1);
  }
}

TEST(ScScan, SkipsUndefinedGradient) {
  // Pure power law with beta < 1 has no gradient at the origin; radii are
  // positive so every row is defined.
  const auto rows = sc_scan(expfam(1, 0.5, 0), scalar_vec(-1), {1, 2, 4});
  EXPECT_EQ(rows.size(), 3u);
  EXPECT_DOUBLE_EQ(rows[0].inward_cosine, 1.0);
  EXPECT_THROW(sc_scan(kGauss, scalar_vec(1), {2, 1}), ContractViolation);
  EXPECT_THROW(sc_scan(kGauss, scalar_vec(0), {1}), ContractViolation);
}

TEST(InwardAcceptance, FreeFlight) {
  const auto flat = flat_target(1);
  const auto traj = integrate(flat, PhasePoint<double>{scalar_vec(1), scalar_vec(1)}, {0.3, 4});
  const auto r = inward_acceptance_check(flat, traj);
  EXPECT_EQ(r.lhs, 0.0);
  EXPECT_EQ(r.rhs, 0.0);
  EXPECT_TRUE(r.holds);
}

TEST(InwardAcceptance, GaussianMatchesAcceptance) {
  const auto traj = integrate(kGauss, PhasePoint<double>{scalar_vec(2), scalar_vec(-1)}, {0.3, 3});
  const auto r = inward_acceptance_check(kGauss, traj);
  const double log_ratio = traj.energies.front() - traj.energies.back();
  EXPECT_EQ(r.holds, accept_prob(kGauss, traj) == 1.0);
  EXPECT_NEAR(r.lhs - r.rhs, -log_ratio, 1e-9);
}

TEST(InwardAcceptance, LogConcaveTailHolds) {
  const auto t = expfam(1, 1.5, 1);
  const auto traj = integrate(t, PhasePoint<double>{scalar_vec(50), scalar_vec(-2)}, {0.5, 4});
  EXPECT_TRUE(inward_acceptance_check(t, traj).holds);
}

TEST(InwardAcceptance, SignAgreementAcrossTargets) {
  std::vector<TargetDensity<double>> targets{kGauss, expfam(1, 1.5, 1, 2), expfam(1, 0.5, 1, 2), expfam(0.5, 2, 1, 3)};
  RandomStream rng(21);
  int checked = 0;
  for (int k = 0; k < 1000; ++k) {
    const auto& t = targets[k % targets.size()];
    const Eigen::VectorXd x0 = 5 * rng.normal_vector(t.dim());
    const Eigen::VectorXd p0 = rng.normal_vector(t.dim());
    const LeapfrogConfig cfg{0.05 + 0.6 * rng.uniform(), rng.uniform_int(1, 16)};
    const auto result = try_integrate(t, PhasePoint<double>{x0, p0}, cfg);
    if (result.diverged) continue;
    const auto& traj = result.trajectory;
    const double log_ratio = traj.energies.front() - traj.energies.back();
    const auto r = inward_acceptance_check(t, traj);
    const double scale = std::max({1.0, std::abs(r.lhs), std::abs(r.rhs)});
    EXPECT_NEAR(r.lhs - r.rhs, -log_ratio, 1e-9 * scale);
    if (std::abs(log_ratio) > 1e-9 * scale) {
      EXPECT_EQ(r.holds, log_ratio >= 0);
    }
    EXPECT_LE(quadrature_identity_residual(t, traj),
              1e-10 * std::max(1.0, psi_drifts(t, traj).forward.norm()));
    ++checked;
  }
  EXPECT_GT(checked, 900);
}

TEST(QuadratureIdentity, SingleStepExact) {
  const auto t = expfam(1, 1.5, 1);
  const auto traj = integrate(t, PhasePoint<double>{scalar_vec(1.3), scalar_vec(0.2)}, {0.4, 1});
  EXPECT_EQ(quadrature_identity_residual(t, traj), 0.0);
}

TEST(QuadratureIdentity, LongGaussianPath) {
  RandomStream rng(22);
  for (int k = 0; k < 20; ++k) {
    const auto traj =
        integrate(kGauss, PhasePoint<double>{scalar_vec(3 * rng.normal()), scalar_vec(rng.normal())}, {0.7, 20});
    EXPECT_LE(quadrature_identity_residual(kGauss, traj), 1e-9);
  }
}

TEST(TailClassify, Classes) {
  EXPECT_EQ(tail_classify(1.5), TailClass::geometric);
  EXPECT_EQ(tail_classify(1.0), TailClass::geometric);
  EXPECT_EQ(tail_classify(0.5), TailClass::heavy_nongeometric);
  EXPECT_EQ(tail_classify(2.0), TailClass::boundary_gaussian);
  EXPECT_EQ(tail_classify(4.0), TailClass::light_nongeometric);
  EXPECT_EQ(to_string(TailClass::boundary_gaussian), "boundary_gaussian");
  EXPECT_THROW(tail_classify(0.0), ContractViolation);
}

TEST(ProbeGrid, RadiiAndDirections) {
  const auto radii = standard_radii();
  ASSERT_EQ(radii.size(), 7u);
  EXPECT_DOUBLE_EQ(radii.front(), 1.0);
  EXPECT_DOUBLE_EQ(radii.back(), 1000.0);
  EXPECT_NEAR(radii[1], std::sqrt(10.0), 1e-12);
  const auto dirs = probe_directions(3);
  ASSERT_EQ(dirs.size(), 11u);
  for (const auto& d : dirs) EXPECT_NEAR(d.norm(), 1.0, 1e-14);
  const auto again = probe_directions(3);
  for (std::size_t i = 0; i < dirs.size(); ++i) EXPECT_EQ(dirs[i], again[i]);
}

TEST(EstimatorConsistency, StderrShrinksWithSampleSize) {
  const auto cfg = kernel(0.5, StepCountDistribution::uniform(5));
  const auto t = expfam(1, 1.5, 1);
  double ratio_sum = 0;
  const int reps = 20;
  for (int r = 0; r < reps; ++r) {
    RandomStream a(100 + r);
    RandomStream b(200 + r);
    const auto small = rejection_prob(cfg, t, scalar_vec(5), 1000, a);
    const auto large = rejection_prob(cfg, t, scalar_vec(5), 2000, b);
    ratio_sum += small.std_error / large.std_error;
  }
  const double mean_ratio = ratio_sum / reps;
  EXPECT_GE(mean_ratio, 1.3);
  EXPECT_LE(mean_ratio, 1.5);
}
