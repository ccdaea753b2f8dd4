#include <gtest/gtest.h>

#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

#include "auvpilot/auvpilot.hpp"

namespace auvpilot {
namespace {

TEST(ViolationFlags, BoundariesCountAsViolations) {
  EXPECT_TRUE(violation_flags(0.5, 0.5, 0.7).undershoot);
  EXPECT_FALSE(violation_flags(0.5, 0.5, 0.7).overshoot);
  EXPECT_TRUE(violation_flags(0.7, 0.5, 0.7).overshoot);
  EXPECT_FALSE(violation_flags(0.7, 0.5, 0.7).undershoot);
  const auto inside = violation_flags(0.6, 0.5, 0.7);
  EXPECT_FALSE(inside.undershoot);
  EXPECT_FALSE(inside.overshoot);
  EXPECT_TRUE(violation_flags(0.2, 0.5, 0.7).undershoot);
  EXPECT_TRUE(violation_flags(0.9, 0.5, 0.7).overshoot);
}

TrajectoryLog constant_u_log(int rows, double dt, double u) {
  TrajectoryLog log;
  log.dt_s = dt;
  for (int k = 0; k < rows; ++k) {
    LogRow row;
    row.t = k * dt;
    row.nu[0] = u;
    log.rows.push_back(row);
  }
  return log;
}

ConstraintEnvelope flat_envelope(double t_end, double lo, double hi) {
  ConstraintEnvelope env;
  env.t = {0.0, t_end};
  env.lower = {lo, lo};
  env.upper = {hi, hi};
  return env;
}

TEST(TuningQuality, UndershootDepthTimesDuration) {
  // 41 rows at dt 0.05 span 2 s; a constant 0.1 undershoot scores 0.2.
  const TrajectoryLog log = constant_u_log(41, 0.05, 0.4);
  const ConstraintEnvelope env = flat_envelope(2.0, 0.5, 0.7);
  EXPECT_NEAR(tuning_quality(log, Channel::u, env, 1.0, 1.0), 0.2, 1e-12);
  EXPECT_NEAR(tuning_quality(log, Channel::u, env, 2.0, 1.0), 0.4, 1e-12);
}

TEST(TuningQuality, OvershootDepthFromTheViolatedBound) {
  const TrajectoryLog log = constant_u_log(41, 0.05, 0.8);
  const ConstraintEnvelope env = flat_envelope(2.0, 0.5, 0.7);
  EXPECT_NEAR(tuning_quality(log, Channel::u, env, 1.0, 1.0), 0.2, 1e-12);
  // The literal form measures overshoot depth from the lower bound instead.
  EXPECT_NEAR(tuning_quality(log, Channel::u, env, 1.0, 1.0, true), 0.6, 1e-12);
}

TEST(TuningQuality, InsideTheCorridorScoresZero) {
  const TrajectoryLog log = constant_u_log(41, 0.05, 0.6);
  const ConstraintEnvelope env = flat_envelope(2.0, 0.5, 0.7);
  EXPECT_EQ(tuning_quality(log, Channel::u, env, 1.0, 1.0), 0.0);
}

TEST(TuningQuality, RejectsShortLogs) {
  const TrajectoryLog log = constant_u_log(1, 0.05, 0.6);
  const ConstraintEnvelope env = flat_envelope(2.0, 0.5, 0.7);
  EXPECT_THROW(tuning_quality(log, Channel::u, env, 1.0, 1.0), std::invalid_argument);
}

TEST(Staircase, ValueHoldsUntilTheNextStep) {
  StaircaseScenario sc;
  sc.initial_value = 0.5;
  sc.steps = {{10.0, 1.0}, {20.0, 2.0}};
  sc.horizon_s = 30.0;
  sc.validate();
  EXPECT_EQ(sc.value_at(0.0), 0.5);
  EXPECT_EQ(sc.value_at(9.999), 0.5);
  EXPECT_EQ(sc.value_at(10.0), 1.0);
  EXPECT_EQ(sc.value_at(15.0), 1.0);
  EXPECT_EQ(sc.value_at(20.0), 2.0);
  EXPECT_EQ(sc.value_at(100.0), 2.0);
}

TEST(Staircase, ValidationRejectsBadSequences) {
  StaircaseScenario sc;
  EXPECT_THROW(sc.validate(), std::invalid_argument);  // no steps
  sc.steps = {{10.0, 1.0}, {10.0, 2.0}};
  sc.horizon_s = 30.0;
  EXPECT_THROW(sc.validate(), std::invalid_argument);  // non-increasing times
  sc.steps = {{10.0, 1.0}, {20.0, 2.0}};
  sc.horizon_s = 20.0;
  EXPECT_THROW(sc.validate(), std::invalid_argument);  // horizon at last step
}

TEST(StaircaseEnvelope, SingleStepBreakpointsAreFrozen) {
  StaircaseScenario sc;
  sc.initial_value = 0.0;
  sc.steps = {{0.0, 1.0}};
  sc.horizon_s = 30.0;
  const ConstraintEnvelope env = staircase_envelope(sc, 5.0, 0.2);

  const double w = 0.2 * 1.0;
  ASSERT_EQ(env.t.size(), 4u);
  EXPECT_DOUBLE_EQ(env.t[0], 0.0);
  EXPECT_DOUBLE_EQ(env.t[1], 5.0);
  EXPECT_DOUBLE_EQ(env.t[2], 5.0);
  EXPECT_DOUBLE_EQ(env.t[3], 30.0);
  EXPECT_DOUBLE_EQ(env.lower[0], -w);
  EXPECT_DOUBLE_EQ(env.lower[1], -w);
  EXPECT_DOUBLE_EQ(env.lower[2], 1.0 - w);
  EXPECT_DOUBLE_EQ(env.lower[3], 1.0 - w);
  for (int i = 0; i < 4; ++i) EXPECT_DOUBLE_EQ(env.upper[i], 1.0 + w);

  // During settling the corridor is wide; right-continuity takes the jump.
  EXPECT_DOUBLE_EQ(env.bounds_at(2.5).first, -w);
  EXPECT_DOUBLE_EQ(env.bounds_at(5.0).first, 1.0 - w);
  EXPECT_DOUBLE_EQ(env.bounds_at(-1.0).first, -w);
  EXPECT_DOUBLE_EQ(env.bounds_at(99.0).first, 1.0 - w);
}

TEST(StaircaseEnvelope, RejectsBadParameters) {
  StaircaseScenario sc;
  sc.steps = {{0.0, 1.0}};
  sc.horizon_s = 30.0;
  EXPECT_THROW(staircase_envelope(sc, -1.0, 0.2), std::invalid_argument);
  EXPECT_THROW(staircase_envelope(sc, 5.0, 0.0), std::invalid_argument);
}

TEST(ConstraintEnvelope, ValidationCatchesShapeErrors) {
  ConstraintEnvelope env;
  EXPECT_THROW(env.validate(), std::invalid_argument);  // empty
  env.t = {0.0, 1.0};
  env.lower = {0.0};
  env.upper = {1.0, 1.0};
  EXPECT_THROW(env.validate(), std::invalid_argument);  // length mismatch
  env.lower = {0.0, 0.0};
  env.t = {1.0, 0.0};
  EXPECT_THROW(env.validate(), std::invalid_argument);  // decreasing times
  env.t = {0.0, 1.0};
  env.lower = {2.0, 0.0};
  EXPECT_THROW(env.validate(), std::invalid_argument);  // lower above upper
}

TEST(ConstraintEnvelope, InterpolatesBetweenBreakpoints) {
  ConstraintEnvelope env;
  env.t = {0.0, 10.0};
  env.lower = {0.0, 1.0};
  env.upper = {2.0, 4.0};
  env.validate();
  const auto [lo, hi] = env.bounds_at(5.0);
  EXPECT_DOUBLE_EQ(lo, 0.5);
  EXPECT_DOUBLE_EQ(hi, 3.0);
}

AutopilotSetup surge_only_setup(double kp, double ki) {
  AutopilotSetup s;
  s.surge.gains = GainTable::constant(kp, ki, 0.0);
  s.depth.gains = GainTable::constant(0.0, 0.0, 0.0);
  s.pitch.gains = GainTable::constant(0.0, 0.0, 0.0);
  s.heading.gains = GainTable::constant(0.0, 0.0, 0.0);
  return s;
}

OptimizerConfig tiny_budget() {
  OptimizerConfig opt;
  opt.mu = 3;
  opt.lambda = 6;
  opt.generations = 4;
  opt.seed = 11;
  opt.simplex_max_iter = 30;
  return opt;
}

TEST(Tune, AlreadyFeasibleBaseIsReturnedUnchanged) {
  const ModelParams model;
  const Plant plant;
  const AutopilotSetup base = surge_only_setup(50.0, 5.0);
  SimConfig sim;
  sim.dt_s = 0.05;

  TuneSetup ts;
  ts.control = ControlChannel::surge;
  ts.scored = Channel::u;
  ts.scenario.steps = {{1.0, 0.5}};
  ts.scenario.horizon_s = 12.0;
  ts.envelope = flat_envelope(12.0, -10.0, 10.0);  // generous: any response fits
  ts.low = Gains{0.0, 0.0, 0.0};
  ts.high = Gains{200.0, 50.0, 100.0};

  const TuneResult r = tune(model, plant, base, sim, ts, tiny_budget());
  EXPECT_EQ(r.q_initial, 0.0);
  EXPECT_EQ(r.q_final, 0.0);
  for (int i = 0; i < kGainPoints; ++i) {
    EXPECT_EQ(r.tuned.kp[i], base.surge.gains.kp[i]);
    EXPECT_EQ(r.tuned.ki[i], base.surge.gains.ki[i]);
    EXPECT_EQ(r.tuned.kd[i], base.surge.gains.kd[i]);
  }
  EXPECT_FALSE(r.final_log.rows.empty());
}

TEST(Tune, NeverScoresWorseThanTheBaseTable) {
  const ModelParams model;
  const Plant plant;
  const AutopilotSetup base = surge_only_setup(2.0, 0.0);  // sluggish on purpose
  SimConfig sim;
  sim.dt_s = 0.05;

  TuneSetup ts;
  ts.control = ControlChannel::surge;
  ts.scored = Channel::u;
  ts.scenario.steps = {{2.0, 0.6}};
  ts.scenario.horizon_s = 14.0;
  ts.settle_s = 4.0;
  ts.corridor_frac = 0.2;
  ts.low = Gains{0.0, 0.0, 0.0};
  ts.high = Gains{200.0, 50.0, 100.0};

  const TuneResult r = tune(model, plant, base, sim, ts, tiny_budget());
  EXPECT_GT(r.q_initial, 0.0);
  EXPECT_LE(r.q_final, r.q_initial);
  EXPECT_GT(r.evaluations, 0);
  ASSERT_EQ(r.per_step_q.size(), 1u);
  EXPECT_NO_THROW(r.tuned.validate());

  const TuneResult again = tune(model, plant, base, sim, ts, tiny_budget());
  EXPECT_EQ(again.q_final, r.q_final);
  for (int i = 0; i < kGainPoints; ++i) {
    EXPECT_EQ(again.tuned.kp[i], r.tuned.kp[i]);
    EXPECT_EQ(again.tuned.ki[i], r.tuned.ki[i]);
    EXPECT_EQ(again.tuned.kd[i], r.tuned.kd[i]);
  }
}

}  // namespace
}  // namespace auvpilot
