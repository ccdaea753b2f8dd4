#include <cmath>

#include <gtest/gtest.h>

#include "auvpilot/optimize.hpp"

namespace ap = auvpilot;

namespace {

ap::Bounds box(int dim, double lo, double hi) {
  ap::Bounds b;
  b.low = Eigen::VectorXd::Constant(dim, lo);
  b.high = Eigen::VectorXd::Constant(dim, hi);
  return b;
}

double sphere(const Eigen::VectorXd& x) { return x.squaredNorm(); }

}  // namespace

TEST(Bounds, ValidateClampContains) {
  ap::Bounds b = box(3, -1.0, 2.0);
  EXPECT_NO_THROW(b.validate());
  Eigen::VectorXd x(3);
  x << -5.0, 0.5, 9.0;
  const Eigen::VectorXd c = b.clamp(x);
  EXPECT_DOUBLE_EQ(c[0], -1.0);
  EXPECT_DOUBLE_EQ(c[1], 0.5);
  EXPECT_DOUBLE_EQ(c[2], 2.0);
  EXPECT_TRUE(b.contains(c));
  EXPECT_FALSE(b.contains(x));

  b.high[1] = b.low[1];
  EXPECT_THROW(b.validate(), std::invalid_argument);
}

TEST(ParallelMap, PreservesIndexOrder) {
  const auto fn = [](int i) { return static_cast<double>(i * i); };
  const auto serial = ap::parallel_map(100, 1, fn);
  const auto threaded = ap::parallel_map(100, 8, fn);
  ASSERT_EQ(serial.size(), 100u);
  for (int i = 0; i < 100; ++i) {
    EXPECT_DOUBLE_EQ(serial[static_cast<std::size_t>(i)], static_cast<double>(i * i));
  }
  EXPECT_EQ(serial, threaded);
}

TEST(Evolve, DescendsOnTheSphereFunction) {
  ap::OptimizerConfig cfg;
  cfg.generations = 60;
  cfg.seed = 7;
  const Eigen::VectorXd start = Eigen::VectorXd::Constant(4, 3.0);
  const ap::OptResult r = ap::evolve(cfg, sphere, box(4, -5.0, 5.0), start);
  EXPECT_LT(r.value, 1e-2);
  EXPECT_EQ(r.value, sphere(r.x));
  for (std::size_t i = 1; i < r.history.size(); ++i) {
    EXPECT_LE(r.history[i], r.history[i - 1]);  // best-so-far is monotone
  }
  EXPECT_EQ(r.evaluations, cfg.mu + cfg.generations * cfg.lambda);
}

TEST(Evolve, ResultIndependentOfWorkerCount) {
  ap::OptimizerConfig one;
  one.generations = 20;
  one.seed = 11;
  one.threads = 1;
  ap::OptimizerConfig four = one;
  four.threads = 4;
  const Eigen::VectorXd start = Eigen::VectorXd::Constant(5, 2.0);
  const ap::OptResult a = ap::evolve(one, sphere, box(5, -4.0, 4.0), start);
  const ap::OptResult b = ap::evolve(four, sphere, box(5, -4.0, 4.0), start);
  EXPECT_EQ(a.value, b.value);
  EXPECT_EQ((a.x - b.x).norm(), 0.0);
  EXPECT_EQ(a.history, b.history);
}

TEST(Evolve, SameSeedSameResultDifferentSeedUsuallyDiffers) {
  ap::OptimizerConfig cfg;
  cfg.generations = 15;
  cfg.seed = 3;
  const Eigen::VectorXd start = Eigen::VectorXd::Constant(3, 2.5);
  const ap::OptResult a = ap::evolve(cfg, sphere, box(3, -4.0, 4.0), start);
  const ap::OptResult b = ap::evolve(cfg, sphere, box(3, -4.0, 4.0), start);
  EXPECT_EQ((a.x - b.x).norm(), 0.0);
  cfg.seed = 4;
  const ap::OptResult c = ap::evolve(cfg, sphere, box(3, -4.0, 4.0), start);
  EXPECT_NE((a.x - c.x).norm(), 0.0);
}

TEST(Evolve, StopsEarlyBelowThreshold) {
  ap::OptimizerConfig cfg;
  cfg.generations = 500;
  cfg.stop_below = 1e-2;
  cfg.seed = 5;
  const ap::OptResult r =
      ap::evolve(cfg, sphere, box(3, -4.0, 4.0), Eigen::VectorXd::Constant(3, 1.0));
  EXPECT_LE(r.value, 1e-2);
  EXPECT_LT(r.history.size(), 501u);
}

TEST(Evolve, RespectsBoxWhenOptimumIsOutside) {
  ap::OptimizerConfig cfg;
  cfg.generations = 40;
  cfg.seed = 9;
  const auto shifted = [](const Eigen::VectorXd& x) {
    return (x - Eigen::VectorXd::Constant(x.size(), 10.0)).squaredNorm();
  };
  const ap::Bounds b = box(2, -5.0, 5.0);
  const ap::OptResult r = ap::evolve(cfg, shifted, b, Eigen::VectorXd::Zero(2));
  EXPECT_TRUE(b.contains(r.x));
  EXPECT_NEAR(r.x[0], 5.0, 1e-6);
  EXPECT_NEAR(r.x[1], 5.0, 1e-6);
}

TEST(NelderMead, PolishesToHighPrecision) {
  const auto quad = [](const Eigen::VectorXd& x) {
    const double dx = x[0] - 1.0;
    const double dy = x[1] - 2.0;
    return 3.0 * dx * dx + 7.0 * dy * dy;
  };
  Eigen::VectorXd start(2);
  start << 4.0, 4.0;
  const ap::OptResult r = ap::nelder_mead(quad, box(2, -5.0, 5.0), start, 400, 1e-14);
  EXPECT_NEAR(r.x[0], 1.0, 1e-6);
  EXPECT_NEAR(r.x[1], 2.0, 1e-6);
  EXPECT_LT(r.value, 1e-10);
  EXPECT_GT(r.evaluations, 0);
}

TEST(NelderMead, ReturnsFeasiblePointWithBoundaryOptimum) {
  const auto shifted = [](const Eigen::VectorXd& x) {
    return (x - Eigen::VectorXd::Constant(x.size(), 10.0)).squaredNorm();
  };
  const ap::Bounds b = box(2, -5.0, 5.0);
  const ap::OptResult r = ap::nelder_mead(shifted, b, Eigen::VectorXd::Zero(2), 300, 1e-12);
  EXPECT_TRUE(b.contains(r.x));
  EXPECT_GT(r.x[0], 4.9);
  EXPECT_GT(r.x[1], 4.9);
}

TEST(Minimize, CombinesGlobalSearchWithLocalPolish) {
  ap::OptimizerConfig cfg;
  cfg.generations = 40;
  cfg.seed = 21;
  cfg.simplex_max_iter = 300;
  const ap::OptResult r =
      ap::minimize(cfg, sphere, box(4, -5.0, 5.0), Eigen::VectorXd::Constant(4, 3.5));
  EXPECT_LT(r.value, 1e-9);  // far tighter than the strategy alone
  EXPECT_GT(r.evaluations, cfg.mu + 10);
}

TEST(Minimize, SkipsPolishOnceTargetReached) {
  ap::OptimizerConfig cfg;
  cfg.generations = 200;
  cfg.stop_below = 0.5;
  cfg.seed = 2;
  const ap::OptResult r =
      ap::minimize(cfg, sphere, box(2, -2.0, 2.0), Eigen::VectorXd::Constant(2, 0.4));
  // Start already satisfies the target: no search beyond the first batch.
  EXPECT_LE(r.value, 0.5);
  EXPECT_EQ(r.evaluations, cfg.mu);
}
