#include <cmath>

#include <gtest/gtest.h>

#include "auvpilot/actuators.hpp"

namespace ap = auvpilot;

TEST(StaticLimit, AllSixBranches) {
  const ap::MotorModel m;
  EXPECT_DOUBLE_EQ(ap::static_limit(m, 2500.0), 2000.0);
  EXPECT_DOUBLE_EQ(ap::static_limit(m, 2000.0), 2000.0);
  EXPECT_DOUBLE_EQ(ap::static_limit(m, 1999.9), 1999.9);
  EXPECT_DOUBLE_EQ(ap::static_limit(m, 50.0), 50.0);
  EXPECT_DOUBLE_EQ(ap::static_limit(m, 25.0), 50.0);
  EXPECT_DOUBLE_EQ(ap::static_limit(m, 1e-300), 50.0);
  EXPECT_DOUBLE_EQ(ap::static_limit(m, 0.0), 0.0);
  EXPECT_DOUBLE_EQ(ap::static_limit(m, -1e-300), -50.0);
  EXPECT_DOUBLE_EQ(ap::static_limit(m, -25.0), -50.0);
  EXPECT_DOUBLE_EQ(ap::static_limit(m, -50.0), -50.0);
  EXPECT_DOUBLE_EQ(ap::static_limit(m, -1999.9), -1999.9);
  EXPECT_DOUBLE_EQ(ap::static_limit(m, -2000.0), -2000.0);
  EXPECT_DOUBLE_EQ(ap::static_limit(m, -2500.0), -2000.0);
}

TEST(RateLimit, SeparateGrowthAndDecayRates) {
  ap::MotorModel m;
  m.n_acc = 800.0;
  m.n_dec = 400.0;
  EXPECT_DOUBLE_EQ(ap::rate_limit(m, 0.0, 1000.0, 0.1), 80.0);     // growing
  EXPECT_DOUBLE_EQ(ap::rate_limit(m, 1000.0, 0.0, 0.1), 960.0);    // shrinking
  EXPECT_DOUBLE_EQ(ap::rate_limit(m, -100.0, -1000.0, 0.1), -180.0);
  EXPECT_DOUBLE_EQ(ap::rate_limit(m, -1000.0, 0.0, 0.1), -960.0);
  EXPECT_DOUBLE_EQ(ap::rate_limit(m, 500.0, 510.0, 0.1), 510.0);   // within bound
}

TEST(Lag, StepResponseExactAtSamplingInstants) {
  ap::MotorModel m;
  m.gain = 1.0;
  m.lag_s = 0.2;
  m.dead_time_s = 0.1;
  const double dt = 0.05;
  ap::LagState lag;
  // Transport delay: 2 buffered steps produce exactly zero output.
  EXPECT_DOUBLE_EQ(lag.step(m, 1.0, dt), 0.0);
  EXPECT_DOUBLE_EQ(lag.step(m, 1.0, dt), 0.0);
  double out = 0.0;
  for (int k = 3; k <= 6; ++k) out = lag.step(m, 1.0, dt);
  // At t = T_t + T_1 = 0.3 s (step 6) the output reaches 1 - 1/e exactly.
  EXPECT_NEAR(out, 1.0 - std::exp(-1.0), 1e-14);

  lag.reset();
  EXPECT_DOUBLE_EQ(lag.output(), 0.0);
  EXPECT_DOUBLE_EQ(lag.step(m, 1.0, dt), 0.0);  // delay buffer cleared
}

TEST(Lag, GainScalesTheSettledOutput) {
  ap::MotorModel m;
  m.gain = 2.5;
  m.lag_s = 0.1;
  m.dead_time_s = 0.0;
  ap::LagState lag;
  double out = 0.0;
  for (int k = 0; k < 2000; ++k) out = lag.step(m, 100.0, 0.01);
  EXPECT_NEAR(out, 250.0, 1e-9);
}

TEST(Thrust, CurveAnchorsBothDirections) {
  const ap::PropellerCurve c;
  EXPECT_NEAR(ap::thrust(c, 1000.0, 0.0), 20.0, 1e-12);
  EXPECT_NEAR(ap::thrust(c, -1000.0, 0.0), -16.0, 1e-12);
  EXPECT_NEAR(ap::thrust(c, 1000.0, 2.0), 16.0, 1e-12);  // advance speed bleeds thrust
  EXPECT_DOUBLE_EQ(ap::thrust(c, 0.0, 5.0), 0.0);
}

TEST(InverseThrust, RoundTripsThroughTheCurve) {
  const ap::PropellerCurve c;
  const ap::MotorModel m;
  for (const double f_d : {0.5, 5.0, 20.0, 60.0, -0.5, -5.0, -20.0, -50.0}) {
    for (const double v_a : {-1.0, 0.0, 1.0, 2.5}) {
      const double n = ap::inverse_thrust(c, m, f_d, v_a);
      EXPECT_NEAR(ap::thrust(c, n, v_a), f_d, 1e-9 * std::abs(f_d))
          << "f_d=" << f_d << " v_a=" << v_a;
      EXPECT_EQ(n > 0.0, f_d > 0.0);
    }
  }
  EXPECT_DOUBLE_EQ(ap::inverse_thrust(c, m, 0.0, 3.0), 0.0);
}

TEST(InverseThrust, ThrowsBeyondSaturationCapability) {
  const ap::PropellerCurve c;
  const ap::MotorModel m;
  // Capability at n_max: +80 N forward, -64 N reverse (v_a = 0).
  EXPECT_NO_THROW(ap::inverse_thrust(c, m, 79.9, 0.0));
  EXPECT_THROW(ap::inverse_thrust(c, m, 80.1, 0.0), ap::ThrustInfeasibleError);
  EXPECT_NO_THROW(ap::inverse_thrust(c, m, -63.9, 0.0));
  EXPECT_THROW(ap::inverse_thrust(c, m, -64.1, 0.0), ap::ThrustInfeasibleError);
  // Advance velocity shifts the cap.
  EXPECT_THROW(ap::inverse_thrust(c, m, 77.0, 1.0), ap::ThrustInfeasibleError);
}

TEST(Geometry, EqualSternForcesProducePureSurge) {
  const ap::ActuatorGeometry g;
  const ap::Vec6 tau = ap::assemble_tau(g, {10.0, 10.0, 10.0, 10.0, 0.0, 0.0});
  EXPECT_NEAR(tau[0], 37.32050807568877, 1e-12);  // 4 * 10 * cos(15deg)^2
  for (int i = 1; i < 6; ++i) EXPECT_NEAR(tau[i], 0.0, 1e-12) << "component " << i;
}

TEST(Geometry, EqualVerticalForcesProducePureHeave) {
  const ap::ActuatorGeometry g;
  const ap::Vec6 tau = ap::assemble_tau(g, {0.0, 0.0, 0.0, 0.0, 5.0, 5.0});
  EXPECT_NEAR(tau[2], 10.0, 1e-12);
  EXPECT_NEAR(tau[4], 0.0, 1e-12);  // opposing lever arms cancel the pitch moment
  EXPECT_NEAR((tau - ap::Vec6::Unit(2) * 10.0).norm(), 0.0, 1e-12);
}

TEST(Geometry, MatrixColumnsStackDirectionAndMoment) {
  const ap::ActuatorGeometry g;
  const ap::Mat6 b = ap::actuator_matrix(g);
  const auto dirs = ap::force_directions(g);
  for (int i = 0; i < ap::kActuatorCount; ++i) {
    EXPECT_LT((ap::Vec3(b.col(i).head<3>()) - dirs[i]).norm(), 1e-15);
    const ap::Vec3 moment = g.lever_arm_m[static_cast<std::size_t>(i)].cross(dirs[i]);
    EXPECT_LT((ap::Vec3(b.col(i).tail<3>()) - moment).norm(), 1e-15);
  }
  // Vertical thruster column: unit heave force, pure pitch moment.
  EXPECT_DOUBLE_EQ(b(2, ap::kVerticalBow), 1.0);
  EXPECT_DOUBLE_EQ(b(4, ap::kVerticalBow), -0.85);
  EXPECT_DOUBLE_EQ(b(4, ap::kVerticalStern), 0.85);
}

TEST(Allocator, RankFiveWithSwayCoupledIntoYaw) {
  const ap::Allocator alloc{ap::ActuatorGeometry{}};
  EXPECT_EQ(alloc.rank(), 5);
}

TEST(Allocator, RoundTripsActuatedWrenches) {
  const ap::ActuatorGeometry g;
  const ap::Allocator alloc(g);
  // Wrenches produced by some force vector are reproducible by construction.
  for (const auto& f0 :
       {ap::Vec6(ap::Vec6::Ones()), ap::Vec6((ap::Vec6() << 3, -2, 1, 4, 0.5, -1).finished()),
        ap::Vec6(ap::Vec6::Unit(4) * 7.0)}) {
    const ap::Vec6 tau_d = ap::actuator_matrix(g) * f0;
    const ap::Vec6 f = alloc.allocate(tau_d);
    EXPECT_LT((ap::actuator_matrix(g) * f - tau_d).norm(), 1e-9);
  }
}

TEST(Allocator, PureSurgeAllocatesEqualSternForces) {
  const ap::Allocator alloc{ap::ActuatorGeometry{}};
  ap::Vec6 tau_d = ap::Vec6::Zero();
  tau_d[0] = 20.0;
  const ap::Vec6 f = alloc.allocate(tau_d);
  EXPECT_NEAR(f[0], f[1], 1e-10);
  EXPECT_NEAR(f[0], f[2], 1e-10);
  EXPECT_NEAR(f[0], f[3], 1e-10);
  EXPECT_NEAR(f[4], 0.0, 1e-10);
  EXPECT_NEAR(f[5], 0.0, 1e-10);
  EXPECT_NEAR(f[0], 20.0 / (4.0 * std::cos(ap::kPi / 12.0) * std::cos(ap::kPi / 12.0)), 1e-10);
}

TEST(Allocator, ProjectsDemandsOutsideTheActuatedSubspace) {
  const ap::ActuatorGeometry g;
  const ap::Allocator alloc(g);
  ap::Vec6 tau_d = ap::Vec6::Zero();
  tau_d[1] = 10.0;  // sway demand: partially reachable through the stern splay
  const ap::Vec6 f = alloc.solve(tau_d);
  const ap::Vec6 tau = ap::actuator_matrix(g) * f;
  // The realized wrench is the orthogonal projection: residual orthogonal
  // to everything the actuators can produce.
  const ap::Vec6 residual = tau - tau_d;
  EXPECT_GT(residual.norm(), 1e-3);  // sway is not fully reachable
  EXPECT_LT(std::abs((ap::actuator_matrix(g).transpose() * residual).maxCoeff()), 1e-9);
  // allocate() tolerates the out-of-span part by design.
  EXPECT_NO_THROW(alloc.allocate(tau_d));
}

TEST(Allocator, RejectsIllConditionedMatrices) {
  ap::Vec6 d;
  d << 1.0, 1e-9, 1.0, 1.0, 1.0, 1.0;  // condition number 1e9 above the limit
  EXPECT_THROW(ap::Allocator{ap::Mat6(d.asDiagonal())}, std::domain_error);
  ap::Vec6 ok;
  ok << 1.0, 0.5, 1.0, 1.0, 1.0, 1.0;
  EXPECT_NO_THROW(ap::Allocator{ap::Mat6(ok.asDiagonal())});
}

TEST(ActuatorBank, ChainAppliesLimitsLagAndCurve) {
  const ap::Plant plant;
  ap::ActuatorBank bank(plant);
  const ap::Vec6 rest = ap::Vec6::Zero();
  // Demand below the deadband snaps to n_min, rate limit caps the first
  // step at n_acc * dt, the lag starts from zero output.
  auto out = bank.step({25.0, 0.0, 0.0, 0.0, 0.0, 0.0}, rest, 0.01);
  EXPECT_DOUBLE_EQ(out.n_limited[0], 50.0);
  EXPECT_DOUBLE_EQ(out.n_limited[1], 0.0);
  EXPECT_GT(out.n_actual[0], 0.0);
  EXPECT_LT(out.n_actual[0], 8.0 + 1e-12);  // rate-limited to 8 rpm, lag below that
  // Large demand saturates; repeated steps settle toward n_max.
  bank.reset();
  double n_act = 0.0;
  for (int k = 0; k < 2000; ++k) {
    n_act = bank.step({5000.0, 0.0, 0.0, 0.0, 0.0, 0.0}, rest, 0.01).n_actual[0];
  }
  EXPECT_NEAR(n_act, 2000.0, 1e-6);
  bank.reset();
  out = bank.step({0.0, 0.0, 0.0, 0.0, 0.0, 0.0}, rest, 0.01);
  EXPECT_DOUBLE_EQ(out.n_actual[0], 0.0);
  EXPECT_LT(out.tau.norm(), 1e-15);
}

TEST(Plant, CurveSelectionByActuatorIndex) {
  ap::Plant plant;
  plant.vertical_curve.p1_pos = 9e-5;
  for (int i = 0; i < ap::kSternCount; ++i) {
    EXPECT_EQ(&plant.curve_for(i), &plant.stern_curve);
  }
  EXPECT_EQ(&plant.curve_for(4), &plant.vertical_curve);
  EXPECT_EQ(&plant.curve_for(5), &plant.vertical_curve);
}
