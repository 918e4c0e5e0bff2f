#include <gtest/gtest.h>

#include <cmath>
#include <regex>
#include <set>

#include "ctxeval/random.hpp"
#include "ctxeval/serialization.hpp"
#include "ctxeval/tasks.hpp"

using namespace ctxeval;

namespace {

TimeSeriesWindow daily(std::vector<double> v) {
  return TimeSeriesWindow(Timestamp::from_civil(2024, 3, 1), Frequency(FrequencyUnit::daily),
                          std::move(v));
}

// Straight-line lag-3 recursion, written out term by term.
std::vector<double> lag3_oracle(const std::vector<double>& x0, const std::vector<double>& a,
                                const std::vector<double>& b, const std::vector<double>& init) {
  std::vector<double> x1(x0.size());
  x1[0] = init[0];
  x1[1] = init[1];
  x1[2] = init[2];
  for (std::size_t t = 3; t < x0.size(); ++t) {
    x1[t] = a[0] * x0[t - 1] + b[0] * x1[t - 1] + a[1] * x0[t - 2] + b[1] * x1[t - 2] +
            a[2] * x0[t - 3] + b[2] * x1[t - 3];
  }
  return x1;
}

}  // namespace

TEST(Svar, NoiselessMatchesIndependentRecursion) {
  Rng rng(31);
  for (int draw = 0; draw < 50; ++draw) {
    SvarParams p;
    p.noise_scale = 0.0;
    for (int l = 0; l < 3; ++l) {
      p.a.push_back(rng.uniform(-1.5, 1.5));
      p.b.push_back(rng.uniform(-0.3, 0.3));
      p.initial.push_back(rng.uniform(-1, 1));
    }
    std::size_t used = 0;
    while (used < 160) {
      const std::size_t len = 1 + rng.below(40);
      p.schedule.push_back({len, 10.0 * static_cast<double>(1 + rng.below(6))});
      used += len;
    }
    const auto inst = svar_generate(p, Timestamp::from_civil(2025, 1, 1), 128, 32, draw);
    std::vector<double> got = inst.history.values();
    got.insert(got.end(), inst.future.values().begin(), inst.future.values().end());
    const auto want = lag3_oracle(expand_schedule(p.schedule, 160), p.a, p.b, p.initial);
    ASSERT_EQ(got.size(), 160u);
    for (std::size_t t = 0; t < 160; ++t) {
      EXPECT_NEAR(got[t], want[t], 1e-12 * std::max(1.0, std::abs(want[t]))) << "t=" << t;
    }
  }
}

TEST(Svar, IdentityDynamicsStayConstant) {
  SvarParams p;
  p.lag = 1;
  p.noise_scale = 0.0;
  p.a = {0.0};
  p.b = {1.0};
  p.initial = {4.25};
  p.schedule = {{50, 7.0}};
  const auto x = svar_simulate(p, 50, {});
  for (double v : x) EXPECT_EQ(v, 4.25);
}

TEST(Svar, ScheduleMustCoverWindow) {
  SvarParams p;
  p.a = {1, 1, 1};
  p.b = {0, 0, 0};
  p.schedule = {{10, 1.0}};
  EXPECT_THROW(svar_simulate(p, 11, {}), std::invalid_argument);
  p.a = {1, 1};
  EXPECT_THROW(svar_simulate(p, 10, {}), std::invalid_argument);
}

TEST(Svar, ContextRendersCoefficientsWithThreeDecimals) {
  SvarParams p;
  p.a = {0.527, 1.380, -0.661};
  p.b = {-0.895, -0.758, -0.793};
  p.schedule = {{100, 8}, {60, 30}};
  const auto inst = svar_generate(p, Timestamp::from_civil(2025, 2, 1), 128, 32, 3);
  const auto& bg = inst.context.background;
  EXPECT_NE(bg.find("Parents for X_1 at lag 1: ['X_0', 'X_1'] affect the forecast variable as "
                    "0.527 * X_0 + -0.895 * X_1."),
            std::string::npos)
      << bg;
  EXPECT_NE(bg.find("1.380 * X_0 + -0.758 * X_1."), std::string::npos);
  EXPECT_NE(inst.context.scenario.find("8 from 2025-02-01 to 2025-05-11"), std::string::npos)
      << inst.context.scenario;
  EXPECT_NE(inst.context.scenario.find("30 from 2025-06-09 to 2025-07-10"), std::string::npos)
      << inst.context.scenario;
  EXPECT_EQ(inst.roi.size(), 32u);
}

TEST(Svar, RegistryInstancesUseDrawnParamsIn2025) {
  const auto reg = default_registry();
  const auto& d = find_task(reg, "svar_lag3");
  for (std::uint64_t s = 0; s < 5; ++s) {
    const auto inst = generate_instance(d, s);
    EXPECT_EQ(inst.history.size(), 128u);
    EXPECT_EQ(inst.future.size(), 32u);
    EXPECT_EQ(static_cast<int>(inst.history.start().date().year()), 2025);
    EXPECT_EQ(static_cast<int>(inst.future.end().plus_days(-1).date().year()), 2025);
    // Every rendered coefficient has exactly three decimals.
    const std::regex coef(R"(as (-?\d+\.\d{3}) \* X_0 \+ (-?\d+\.\d{3}) \* X_1\.)");
    const auto& bg = inst.context.background;
    EXPECT_EQ(std::distance(std::sregex_iterator(bg.begin(), bg.end(), coef),
                            std::sregex_iterator()),
              3);
  }
}

TEST(Quantile, LinearInterpolation) {
  EXPECT_DOUBLE_EQ(quantile_linear({4, 1, 3, 2}, 0.25), 1.75);
  EXPECT_DOUBLE_EQ(quantile_linear({4, 1, 3, 2}, 0.75), 3.25);
  EXPECT_DOUBLE_EQ(quantile_linear({4, 1, 3, 2}, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(quantile_linear({4, 1, 3, 2}, 1.0), 4.0);
  EXPECT_DOUBLE_EQ(quantile_linear({5}, 0.3), 5.0);
}

TEST(Bounded, HandEvaluatedClip) {
  const auto inst = bounded_generate(daily({9, 9, 9, 1, 2, 3, 4}), 3, 0.25, 0.75);
  EXPECT_EQ(inst.future.values(), (std::vector<double>{1.75, 2, 3, 3.25}));
  EXPECT_EQ(inst.constraint, ConstraintSpec::interval_bounds(1.75, 3.25));
  EXPECT_TRUE(inst.roi.empty());
  EXPECT_EQ(constraint_violation(inst.constraint, inst.future.values()), 0.0);
}

TEST(Bounded, FullRangeIsIdentity) {
  const auto base = daily({5, 6, 7, 3, 8, 1, 4});
  const auto inst = bounded_generate(base, 3, 0.0, 1.0);
  EXPECT_EQ(inst.future.values(), (std::vector<double>{3, 8, 1, 4}));
  EXPECT_EQ(inst.constraint.lower, 1.0);
  EXPECT_EQ(inst.constraint.upper, 8.0);
}

TEST(Bounded, ConstantFutureIsValid) {
  const auto inst = bounded_generate(daily({1, 2, 3, 3, 3}), 2, 0.1, 0.9);
  EXPECT_EQ(inst.constraint.lower, inst.constraint.upper);
  inst.validate();
}

TEST(Bounded, VerbalizedBoundsRoundTrip) {
  const auto reg = default_registry();
  for (const char* id : {"bounded_daily_sensor", "bounded_hourly_load"}) {
    for (std::uint64_t s = 0; s < 5; ++s) {
      const auto inst = generate_instance(find_task(reg, id), s);
      const std::regex re(
          R"(the values are bounded above by (-?\d+\.\d{2}), the values are bounded below by (-?\d+\.\d{2}))");
      std::smatch m;
      ASSERT_TRUE(std::regex_search(inst.context.constraints_text, m, re))
          << inst.context.constraints_text;
      EXPECT_NEAR(std::stod(m[1]), inst.constraint.upper, 0.005 + 1e-12);
      EXPECT_NEAR(std::stod(m[2]), inst.constraint.lower, 0.005 + 1e-12);
    }
  }
}

TEST(Spike, Arithmetic) {
  const auto inst = spike_generate(daily({1, 1, 2, 2, 2, 2}), 2, 1, 2, 5.0);
  EXPECT_EQ(inst.future.values(), (std::vector<double>{2, 10, 10, 2}));
  EXPECT_EQ(inst.roi, (RegionOfInterest{1, 2}));
  EXPECT_EQ(inst.effect.indices, inst.roi);
  EXPECT_EQ(inst.constraint.kind, ConstraintSpec::Kind::none);
}

TEST(Spike, UnitMultiplierKeepsFutureAndRoi) {
  const auto base = daily({1, 1, 2, 3, 4, 5});
  const auto inst = spike_generate(base, 2, 0, 3, 1.0);
  EXPECT_EQ(inst.future.values(), (std::vector<double>{2, 3, 4, 5}));
  EXPECT_EQ(inst.roi, (RegionOfInterest{0, 1, 2}));
}

TEST(Spike, EventOutsideHorizonFails) {
  const auto base = daily({1, 1, 2, 3, 4, 5});
  EXPECT_THROW(spike_generate(base, 2, 3, 2, 5.0), std::invalid_argument);
  EXPECT_THROW(spike_generate(base, 2, 0, 0, 5.0), std::invalid_argument);
  EXPECT_THROW(spike_generate(base, 2, 0, 1, 0.0), std::invalid_argument);
}

TEST(Spike, ScenarioStatesStartDurationAndMultiplier) {
  const auto reg = default_registry();
  const auto inst = generate_instance(find_task(reg, "spike_electricity"), 2);
  const auto& text = inst.context.scenario;
  EXPECT_NE(text.find(inst.future.timestamp(inst.roi.front()).to_string()), std::string::npos);
  EXPECT_NE(text.find(std::to_string(inst.roi.size()) + " hour"), std::string::npos) << text;
  EXPECT_NE(text.find("5 times"), std::string::npos);
}

TEST(Outage, ZerosExactlyTheStatedBlocks) {
  std::vector<double> v(84 + 28);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = 100.0 + static_cast<double>(i);
  const auto base = daily(v);
  const std::size_t phase = 5;
  const auto inst = outage_generate(base, 84, 14, 7, 6, phase);
  // Stated start date -> index of the first zeroed block.
  const std::regex re(R"(starting from (\d{4}-\d{2}-\d{2} \d{2}:\d{2}:\d{2}))");
  std::smatch m;
  ASSERT_TRUE(std::regex_search(inst.context.scenario, m, re)) << inst.context.scenario;
  const auto stated = Timestamp::parse(m[1].str());
  std::size_t start = 0;
  while (inst.history.timestamp(start) != stated) ++start;
  EXPECT_EQ(start, phase);
  EXPECT_NE(inst.context.scenario.find("7 days every 14 days"), std::string::npos);
  for (std::size_t i = 0; i < 84; ++i) {
    const bool in_block = i >= start && (i - start) % 14 < 7;
    EXPECT_EQ(inst.history.values()[i] == 0.0, in_block) << "i=" << i;
  }
  EXPECT_EQ(inst.future.values(), std::vector<double>(v.begin() + 84, v.end()));
}

TEST(Outage, RoiFollowsWouldBeSchedule) {
  const auto base = daily(std::vector<double>(100, 5.0));
  for (std::size_t phase = 0; phase < 14; ++phase) {
    const auto inst = outage_generate(base, 70, 14, 7, 2, phase);
    const std::size_t history_offset = (70 - phase) % 14;
    RegionOfInterest want;
    for (std::size_t i = 0; i < 30; ++i) {
      if ((i + history_offset) % 14 < 7) want.push_back(i);
    }
    EXPECT_EQ(inst.roi, want) << "phase=" << phase;
  }
}

TEST(Outage, ZeroCountLeavesHistory) {
  const auto base = daily(std::vector<double>(40, 5.0));
  const auto inst = outage_generate(base, 30, 14, 7, 0, 3);
  EXPECT_EQ(inst.history.values(), std::vector<double>(30, 5.0));
  EXPECT_FALSE(inst.roi.empty());
}

TEST(Outage, PatternExceedingHistoryFails) {
  const auto base = daily(std::vector<double>(40, 5.0));
  EXPECT_THROW(outage_generate(base, 30, 14, 7, 4, 3), std::invalid_argument);
  EXPECT_THROW(outage_generate(base, 30, 14, 14, 1, 3), std::invalid_argument);
}

TEST(Weights, TwoClusterFixture) {
  std::vector<TaskDescriptor> ds;
  auto add = [&](std::string id, std::string c) {
    TaskDescriptor d;
    d.task_id = std::move(id);
    d.cluster_id = std::move(c);
    ds.push_back(d);
  };
  add("t1", "A");
  add("t2", "A");
  add("t3", "B");
  add("t4", "B");
  add("t5", "B");
  const auto w = task_weights(ds);
  EXPECT_DOUBLE_EQ(w.at("t1"), 0.25);
  EXPECT_DOUBLE_EQ(w.at("t2"), 0.25);
  EXPECT_DOUBLE_EQ(w.at("t3"), 1.0 / 6);
  double sum = 0;
  for (const auto& [_, x] : w) sum += x;
  EXPECT_NEAR(sum, 1.0, 1e-12);
  EXPECT_THROW(task_weights({}), std::invalid_argument);
}

TEST(Weights, SingleClusterAndRegistry) {
  auto reg = default_registry();
  for (auto& d : reg) d.cluster_id = "one";
  for (const auto& [_, x] : task_weights(reg)) EXPECT_DOUBLE_EQ(x, 1.0 / reg.size());
  double sum = 0;
  for (const auto& [_, x] : task_weights(default_registry())) sum += x;
  EXPECT_NEAR(sum, 1.0, 1e-12);
}

TEST(Registry, ShapeAndClusters) {
  const auto reg = default_registry();
  EXPECT_GE(reg.size(), 4u);
  std::set<std::string> ids, clusters;
  for (const auto& d : reg) {
    ids.insert(d.task_id);
    clusters.insert(d.cluster_id);
    EXPECT_FALSE(describe_task(d).empty());
  }
  EXPECT_EQ(ids.size(), reg.size());
  EXPECT_GE(clusters.size(), 2u);
  EXPECT_THROW(find_task(reg, "nope"), std::invalid_argument);
}

TEST(Generation, DeterministicAndSeedSensitive) {
  for (const auto& d : default_registry()) {
    const auto a = instance_to_json(generate_instance(d, 3)).dump();
    const auto b = instance_to_json(generate_instance(d, 3)).dump();
    EXPECT_EQ(a, b) << d.task_id;
    EXPECT_NE(generate_instance(d, 3).history.values(), generate_instance(d, 4).history.values());
  }
}

TEST(Generation, EvalAndCalibrationInstancesAreDisjoint) {
  const InstancePlan plan;
  plan.validate();
  EXPECT_EQ(plan.eval_seeds.size(), 5u);
  EXPECT_EQ(plan.calibration_seeds.size(), 25u);
  for (const auto& d : default_registry()) {
    std::set<std::vector<double>> seen;
    for (auto s : plan.eval_seeds) seen.insert(generate_instance(d, s).history.values());
    for (auto s : plan.calibration_seeds) {
      EXPECT_FALSE(seen.contains(generate_instance(d, s).history.values()));
    }
  }
  InstancePlan bad;
  bad.eval_seeds.push_back(1000);
  EXPECT_THROW(bad.validate(), std::invalid_argument);
}

TEST(Generation, EveryInstanceSatisfiesItsConstraint) {
  const InstancePlan plan;
  for (const auto& d : default_registry()) {
    for (auto s : plan.eval_seeds) {
      const auto inst = generate_instance(d, s);
      EXPECT_EQ(constraint_violation(inst.constraint, inst.future.values()), 0.0);
      EXPECT_EQ(inst.history.size(), d.history_len);
      EXPECT_EQ(inst.future.size(), d.horizon);
      EXPECT_EQ(inst.context_types, d.context_types);
      EXPECT_FALSE(inst.context.empty());
    }
  }
}

TEST(Generation, CalibrationGivesFinitePositiveScale) {
  const InstancePlan plan;
  for (const auto& d : default_registry()) {
    const double alpha = calibrate_alpha(calibration_futures(d, plan));
    EXPECT_TRUE(std::isfinite(alpha) && alpha > 0.0) << d.task_id;
  }
}

TEST(Generation, JsonRoundTrip) {
  for (const auto& d : default_registry()) {
    const auto inst = generate_instance(d, 1);
    const auto back = instance_from_json(Json::parse(instance_to_json(inst).dump()));
    EXPECT_EQ(back, inst) << d.task_id;
  }
}
