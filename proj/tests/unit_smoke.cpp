#include <gtest/gtest.h>

#include "auvpilot/auvpilot.hpp"

TEST(Smoke, HeadersCompileAndDefaultModelIsSane) {
  auvpilot::ModelParams p;
  auvpilot::DynamicsModel model(p);
  const auvpilot::Vec6 a =
      model.acceleration(auvpilot::Vec6::Zero(), auvpilot::Vec6::Zero(), auvpilot::Vec3::Zero(),
                         auvpilot::Vec6::Zero(), auvpilot::Vec6::Ones());
  EXPECT_TRUE(a.allFinite());
}
