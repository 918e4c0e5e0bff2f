#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "ctxeval/errors.hpp"
#include "ctxeval/random.hpp"
#include "ctxeval/scoring.hpp"

using namespace ctxeval;

namespace {

std::vector<double> random_samples(Rng& rng, std::size_t m, double lo, double hi) {
  std::vector<double> v(m);
  for (double& x : v) x = rng.uniform(lo, hi);
  return v;
}

}  // namespace

TEST(CrpsPwm, PointMassAtTruthIsZero) {
  const std::vector<double> s{2.5, 2.5, 2.5};
  EXPECT_EQ(crps_pwm(s, 2.5), 0.0);
  EXPECT_EQ(crps_energy(s, 2.5), 0.0);
}

TEST(CrpsPwm, HandEvaluatedExamples) {
  // Energy form by hand: mean |x - 0| = 2, pairwise sum = 8,
  // 2 - 8 / (2 * 3 * 2) = 4/3.
  const std::vector<double> s{1, 2, 3};
  EXPECT_NEAR(crps_pwm(s, 0.0), 4.0 / 3.0, 1e-15);
  EXPECT_NEAR(crps_energy(s, 0.0), 4.0 / 3.0, 1e-15);
  // mean |x - 2| = 2/3 cancels the pairwise term 8/12.
  EXPECT_NEAR(crps_pwm(s, 2.0), 0.0, 1e-15);
  EXPECT_NEAR(crps_energy(s, 2.0), 0.0, 1e-15);
}

TEST(CrpsEnergy, TwoPointExample) {
  // (1/2)(0 + 1) - (1/(2*2*1)) * (1 + 1) = 0
  const std::vector<double> s{0, 1};
  EXPECT_DOUBLE_EQ(crps_energy(s, 0.0), 0.0);
}

TEST(CrpsPwm, UnsortedInputMatchesSorted) {
  const std::vector<double> a{3, 1, 2, 2, 5};
  const std::vector<double> b{1, 2, 2, 3, 5};
  EXPECT_DOUBLE_EQ(crps_pwm(a, 2.2), crps_pwm(b, 2.2));
}

TEST(CrpsPwm, RejectsBadInput) {
  EXPECT_THROW(crps_pwm(std::vector<double>{1.0}, 0.0), std::invalid_argument);
  EXPECT_THROW(crps_pwm(std::vector<double>{1.0, NAN}, 0.0), std::invalid_argument);
  EXPECT_THROW(crps_energy(std::vector<double>{}, 0.0), std::invalid_argument);
}

TEST(CrpsPwm, EquivalentToEnergyFormOnRandomInputs) {
  Rng rng(7);
  for (int c = 0; c < 300; ++c) {
    const std::size_t m = 2 + rng.below(99);
    const auto s = random_samples(rng, m, -1000, 1000);
    const double y = rng.uniform(-1000, 1000);
    const double e = crps_energy(s, y);
    EXPECT_LE(std::abs(crps_pwm(s, y) - e), 1e-9 * (1 + std::abs(e)));
  }
}

TEST(CrpsPwm, TiedSamplesMatchEnergyRegardlessOfOrder) {
  Rng rng(11);
  for (int c = 0; c < 100; ++c) {
    std::vector<double> s(10);
    for (double& x : s) x = static_cast<double>(rng.below(3));
    const double y = rng.uniform(-2, 4);
    EXPECT_NEAR(crps_pwm(s, y), crps_energy(s, y), 1e-12);
  }
}

TEST(CrpsPwm, TranslationInvarianceAndHomogeneity) {
  Rng rng(3);
  for (int c = 0; c < 200; ++c) {
    const std::size_t m = 2 + rng.below(60);
    auto s = random_samples(rng, m, -50, 50);
    const double y = rng.uniform(-50, 50);
    const double base = crps_pwm(s, y);
    const double b = rng.uniform(-100, 100);
    const double a = rng.uniform(0.1, 100);
    std::vector<double> shifted = s, scaled = s;
    for (double& x : shifted) x += b;
    for (double& x : scaled) x *= a;
    EXPECT_NEAR(crps_pwm(shifted, y + b), base, 1e-9 * (1 + std::abs(base)));
    EXPECT_NEAR(crps_pwm(scaled, a * y), a * base, 1e-9 * (1 + std::abs(a * base)));
  }
}

TEST(CrpsEmpirical, ZeroOnlyForPointMassAtTruth) {
  EXPECT_EQ(crps_empirical(std::vector<double>{0, 0, 0}, 0.0), 0.0);
  // (1/3) * 3 - (1/18) * 12 = 1/3
  EXPECT_NEAR(crps_empirical(std::vector<double>{0, 0, 3}, 0.0), 1.0 / 3.0, 1e-15);
}

TEST(ConstraintViolation, FormulaExamples) {
  const std::vector<double> t{9, 11, 12};
  EXPECT_DOUBLE_EQ(constraint_violation(ConstraintSpec::upper_bound(10), t), 1.0);
  EXPECT_DOUBLE_EQ(
      constraint_violation(ConstraintSpec::variable_upper_bounds({{1, 5.0}}),
                           std::vector<double>{9, 6, 9}),
      1.0);
  EXPECT_DOUBLE_EQ(constraint_violation(ConstraintSpec::lower_bound(10), t), 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(
      constraint_violation(ConstraintSpec::interval_bounds(10, 11.5), t),
      (1.0 + 0.5) / 3.0);
  EXPECT_EQ(constraint_violation(ConstraintSpec::none_spec(), t), 0.0);
  EXPECT_EQ(constraint_violation(ConstraintSpec::upper_bound(12), t), 0.0);
}

TEST(ConstraintViolation, RejectsIndicesOutsideHorizon) {
  EXPECT_THROW(constraint_violation(ConstraintSpec::variable_upper_bounds({{3, 1.0}}),
                                    std::vector<double>{1, 2, 3}),
               std::invalid_argument);
  EXPECT_THROW(ConstraintSpec::interval_bounds(2, 1), std::invalid_argument);
}

TEST(TwCrpsConstraint, SatisfiedOrNoneIsZero) {
  const ForecastEnsemble e(std::vector<std::vector<double>>{{1, 2}, {3, 4}, {0, 0}});
  EXPECT_EQ(tw_crps_constraint(e, ConstraintSpec::upper_bound(4)), 0.0);
  EXPECT_EQ(tw_crps_constraint(e, ConstraintSpec::none_spec()), 0.0);
  EXPECT_EQ(tw_crps_constraint(e, ConstraintSpec::upper_bound(4), ConstraintEstimator::pwm),
            0.0);
}

TEST(TwCrpsConstraint, PwmPathExamples) {
  // v-values [0, 0, 3]: upper bound 0 over a one-step horizon.
  const auto spec = ConstraintSpec::upper_bound(0.0);
  const ForecastEnsemble e003(std::vector<std::vector<double>>{{0}, {0}, {3}});
  EXPECT_NEAR(tw_crps_constraint(e003, spec, ConstraintEstimator::pwm), 0.0, 1e-15);
  const ForecastEnsemble e123(std::vector<std::vector<double>>{{1}, {2}, {3}});
  EXPECT_NEAR(tw_crps_constraint(e123, spec, ConstraintEstimator::pwm), 4.0 / 3.0, 1e-15);
  EXPECT_NEAR(crps_energy(std::vector<double>{1, 2, 3}, 0.0), 4.0 / 3.0, 1e-15);
}

TEST(TwCrpsConstraint, EmpiricalPathIsPositiveForSingleViolator) {
  const ForecastEnsemble e003(std::vector<std::vector<double>>{{0}, {0}, {3}});
  EXPECT_NEAR(tw_crps_constraint(e003, ConstraintSpec::upper_bound(0.0)), 1.0 / 3.0, 1e-15);
}

TEST(CalibrateAlpha, Examples) {
  EXPECT_DOUBLE_EQ(calibrate_alpha({{0, 4}, {1, 5, 3}}), 0.25);
  EXPECT_DOUBLE_EQ(calibrate_alpha({{0, 1}, {2, 5}}), 0.5);
  EXPECT_THROW(calibrate_alpha({{1, 1}, {2, 2}}), CalibrationError);
  EXPECT_THROW(calibrate_alpha({}), std::invalid_argument);
}

TEST(Rcrps, PerfectForecastIsExactlyZero) {
  const std::vector<double> truth{1.1, 0.3, 7.25, -2.0};
  const auto e = ForecastEnsemble::replicate(truth, 25);
  ScoringConfig cfg;
  cfg.alpha = 0.37;
  const auto r = rcrps(e, truth, {1, 2}, ConstraintSpec::interval_bounds(-2, 7.25), cfg);
  EXPECT_EQ(r.rcrps, 0.0);
  EXPECT_EQ(r.term_constraint, 0.0);
  EXPECT_FALSE(r.significant_failure);
}

TEST(Rcrps, FullRoiMatchesEmptyRoi) {
  Rng rng(5);
  std::vector<std::vector<double>> rows(6, std::vector<double>(4));
  for (auto& r : rows)
    for (double& x : r) x = rng.normal();
  const ForecastEnsemble e(rows);
  const std::vector<double> truth{0.1, -0.2, 0.3, 0.0};
  ScoringConfig cfg;
  const auto all = rcrps(e, truth, {0, 1, 2, 3}, ConstraintSpec::upper_bound(1.0), cfg);
  const auto none = rcrps(e, truth, {}, ConstraintSpec::upper_bound(1.0), cfg);
  EXPECT_EQ(all, none);
}

TEST(Rcrps, TwoStepRoiAgainstEnergyOracle) {
  const ForecastEnsemble e(std::vector<std::vector<double>>{{0.5, 2.0}, {1.5, -1.0}, {2.5, 0.0}, {0.0, 3.0}});
  const std::vector<double> truth{1.0, 0.5};
  ScoringConfig cfg;
  cfg.alpha = 2.0;
  const double c0 = crps_energy(e.column(0), truth[0]);
  const double c1 = crps_energy(e.column(1), truth[1]);
  const auto r = rcrps(e, truth, {0}, ConstraintSpec::none_spec(), cfg);
  EXPECT_NEAR(r.rcrps, 2.0 * (c0 / 2 + c1 / 2), 1e-12);
  EXPECT_NEAR(r.term_roi, c0, 1e-12);
  EXPECT_NEAR(r.term_non_roi, c1, 1e-12);
}

TEST(Rcrps, ClippingAndSignificantFailure) {
  const std::vector<double> truth{0.0, 0.0};
  const ForecastEnsemble e(std::vector<std::vector<double>>{{10, 10}, {10, 10}});
  ScoringConfig cfg;
  const auto r = rcrps(e, truth, {}, ConstraintSpec::none_spec(), cfg);
  EXPECT_DOUBLE_EQ(r.rcrps, 10.0);
  EXPECT_DOUBLE_EQ(r.rcrps_clipped, 5.0);
  EXPECT_TRUE(r.significant_failure);
}

TEST(Rcrps, RejectsDimensionAndRoiErrors) {
  const ForecastEnsemble e(std::vector<std::vector<double>>{{1, 2}, {3, 4}});
  ScoringConfig cfg;
  EXPECT_THROW(rcrps(e, std::vector<double>{1.0}, {}, {}, cfg), std::invalid_argument);
  EXPECT_THROW(rcrps(e, std::vector<double>{1, 2}, {2}, {}, cfg), std::invalid_argument);
  EXPECT_THROW(rcrps(e, std::vector<double>{1, 2}, {0, 0}, {}, cfg), std::invalid_argument);
  cfg.alpha = 0.0;
  EXPECT_THROW(rcrps(e, std::vector<double>{1, 2}, {}, {}, cfg), std::invalid_argument);
}

TEST(Rcrps, StrictlyIncreasingInBetaWhenAnyTrajectoryViolates) {
  Rng rng(9);
  for (int c = 0; c < 50; ++c) {
    std::vector<std::vector<double>> rows(5, std::vector<double>(3));
    for (auto& r : rows)
      for (double& x : r) x = rng.uniform(0, 1);
    rows[rng.below(5)][rng.below(3)] = 2.0;  // at least one violator
    const ForecastEnsemble e(rows);
    const std::vector<double> truth{0.5, 0.5, 0.5};
    ScoringConfig lo, hi;
    lo.beta = 1.0;
    hi.beta = 10.0;
    const auto spec = ConstraintSpec::upper_bound(1.0);
    EXPECT_LT(rcrps(e, truth, {}, spec, lo).rcrps, rcrps(e, truth, {}, spec, hi).rcrps);
  }
}

TEST(Rcrps, NeverMeaningfullyNegative) {
  Rng rng(21);
  for (int c = 0; c < 200; ++c) {
    const std::size_t m = 2 + rng.below(30), h = 1 + rng.below(8);
    std::vector<std::vector<double>> rows(m, std::vector<double>(h));
    for (auto& r : rows)
      for (double& x : r) x = rng.normal(0, 3);
    std::vector<double> truth(h);
    for (double& x : truth) x = rng.normal(0, 3);
    ScoringConfig cfg;
    cfg.alpha = 0.2;
    const auto r = rcrps(ForecastEnsemble(rows), truth, {}, {}, cfg);
    EXPECT_GE(r.rcrps, -1e-6 * cfg.alpha * 3.0);
  }
}

TEST(ForecastEnsembleType, Invariants) {
  EXPECT_THROW(ForecastEnsemble({{1.0, 2.0}}), std::invalid_argument);
  EXPECT_THROW(ForecastEnsemble({{1.0, 2.0}, {1.0}}), std::invalid_argument);
  EXPECT_THROW(ForecastEnsemble({{1.0, INFINITY}, {1.0, 2.0}}), std::invalid_argument);
  const ForecastEnsemble e(std::vector<std::vector<double>>{{1, 2, 3}, {4, 5, 6}});
  EXPECT_EQ(e.column(1), (std::vector<double>{2, 5}));
}
