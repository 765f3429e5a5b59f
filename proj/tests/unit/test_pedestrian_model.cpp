#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "pedsim/pedestrian_model.hpp"

using namespace pedsim;

TEST(CrossingGain, MidpointIsHalf) { EXPECT_EQ(crossing_gain(2.0, 2.0), 0.5); }

TEST(CrossingGain, SaturatesToReferenceSpeed)
{
  // Far-future conflict: the pedestrian walks at v_ped_ref = 1.4 m/s.
  EXPECT_NEAR(crossing_gain(100.0, 2.0) * 1.4, 1.4, 1e-12);
  EXPECT_NEAR(crossing_gain(-100.0, 2.0), 0.0, 1e-12);
  EXPECT_GT(crossing_gain(-1000.0, 2.0), -1e-300);
  EXPECT_LE(crossing_gain(1000.0, 2.0), 1.0);
}

TEST(CrossingGain, InverseAtNinetyPercent)
{
  // gain = 0.9  <=>  ttc - c = ln 9
  EXPECT_NEAR(crossing_gain(4.0 + std::log(9.0), 4.0), 0.9, 1e-12);
}

TEST(CrossingGain, MatchesTanhForm)
{
  for (double t = -10.0; t <= 10.0; t += 0.37) {
    EXPECT_NEAR(crossing_gain(t, 1.5), oracle::sigmoid(t, 1.5), 1e-14);
  }
}

TEST(TtcMpc, HandArithmetic)
{
  ScenarioGeometry g;
  PedModelParams p{4.0, 1.4, 1.0, 0.05};
  // x_ped_path - x_veh = 20, v = 10; y_veh_lane - y_ped = 3.5
  const JointState s{0, -20.0, 10.0, -3.5, 0.0};
  EXPECT_NEAR(ttc_mpc(s, g, p), -0.5, 1e-12);
}

TEST(TtcMpc, BothGapsZero)
{
  ScenarioGeometry g;
  EXPECT_DOUBLE_EQ(ttc_mpc({0, 0.0, 5.0, 0.0, 0.0}, g, {}), 0.0);
}

TEST(TtcMpc, StandstillUsesVelocityFloor)
{
  ScenarioGeometry g;
  PedModelParams p;
  const double ttc = ttc_mpc({0, -10.0, 0.0, -2.8, 0.0}, g, p);
  EXPECT_TRUE(std::isfinite(ttc));
  EXPECT_NEAR(ttc, 10.0 / 0.05 - 2.8 / 1.4, 1e-9);
}

TEST(TtcMpc, UsesPathOffsets)
{
  ScenarioGeometry g;
  g.x_ped_path = 1.0;
  g.y_veh_lane = 0.5;
  EXPECT_NEAR(ttc_mpc({0, -9.0, 5.0, -2.3, 0.0}, g, {}), 10.0 / 5.0 - 2.8 / 1.4, 1e-12);
}

TEST(PedNextVelocity, MidpointTimesReference)
{
  ScenarioGeometry g;
  PedModelParams p{2.0, 1.4, 1.0, 0.05};
  // TTC exactly c = 2: vehicle term 4 s, pedestrian term 2 s.
  const JointState s{0, -40.0, 10.0, -2.8, 0.0};
  EXPECT_NEAR(ped_next_velocity(s, g, p), 0.7, 1e-12);
}

TEST(PedNextVelocity, NegativeTtcExample)
{
  ScenarioGeometry g;
  PedModelParams p{4.0, 1.4, 1.0, 0.05};
  const JointState s{0, -20.0, 10.0, -3.5, 0.0};
  EXPECT_NEAR(ped_next_velocity(s, g, p), 1.4 / (1.0 + std::exp(4.5)), 1e-12);
  // The rounded value 0.0155 is quoted to about two significant figures.
  EXPECT_NEAR(ped_next_velocity(s, g, p), 0.0155, 5e-4);
}

TEST(PedNextVelocity, YieldsForImminentVehicle)
{
  EXPECT_LT(ped_next_velocity({0, -1.0, 10.0, -30.0, 0.0}, {}, {}), 1e-6);
}

TEST(DiscountIntention, Examples)
{
  EXPECT_DOUBLE_EQ(discount_intention({0.8, 3.0}, 1.0, 3.0), 0.8);
  EXPECT_NEAR(discount_intention({1.0, 0.0}, 1.0, 1.0), 0.9, 1e-15);
  EXPECT_NEAR(discount_intention({1.0, 2.0}, 2.0, 5.0), 0.531441, 1e-12);
}

TEST(DiscountIntention, RejectsTimeBeforeOnset)
{
  EXPECT_THROW(discount_intention({1.0, 2.0}, 1.0, 1.0), std::domain_error);
}
