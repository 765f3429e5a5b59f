#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "pedsim/baselines.hpp"
#include "pedsim/controller.hpp"
#include "pedsim/prediction.hpp"

using namespace pedsim;

TEST(VelocityTracking, Examples)
{
  const ControllerParams p;
  EXPECT_EQ(velocity_tracking({0, 0, p.v_veh_ref, 0, 0}, p), 0.0);
  EXPECT_NEAR(velocity_tracking({0, 0, p.v_veh_ref - 2.0, 0, 0}, p), 2.0, 1e-12);
  EXPECT_NEAR(velocity_tracking({0, 0, 10.0, 0, 0}, p), -1.67, 1e-12);
}

TEST(VelocityTracking, Saturates)
{
  const ControllerParams p;
  EXPECT_EQ(velocity_tracking({0, 0, 0.0, 0, 0}, p), p.a_max);
  EXPECT_EQ(velocity_tracking({0, 0, 30.0, 0, 0}, p), p.a_min);
}

TEST(BrakeToStop, StopsShortOfTheStandOff)
{
  const ControllerParams p;
  const ScenarioGeometry g;
  JointState s{0, -40.0, p.v_veh_ref, -3.0, 0.0};
  for (int k = 0; k < 400 && s.v_veh > 1e-3; ++k) {
    const double u = brake_to_stop(s, g, p, p.v_veh_ref);
    ASSERT_GE(u, p.a_min);
    ASSERT_LE(u, p.a_max);
    s = step(s, u, 0.0, 0.05);
    s.v_veh = std::max(s.v_veh, 0.0);
  }
  EXPECT_LT(s.v_veh, 1e-3);
  EXPECT_LE(s.x_veh, g.conflict_x - p.d_min);
  EXPECT_GT(s.x_veh, g.conflict_x - p.d_min - p.stop_buffer - 1.0);
}

namespace {

/// Closes the loop of a baseline around a standing pedestrian at y_ped.
template <class Decide>
JointState drive(JointState s, double seconds, Decide decide)
{
  const double dt = 0.05;
  const int ticks = static_cast<int>(std::lround(seconds / dt));
  for (int k = 0; k < ticks; ++k) {
    const double u = decide(s);
    s = step(s, u, 0.0, dt);
    s.v_veh = std::max(s.v_veh, 0.0);
  }
  return s;
}

}  // namespace

TEST(Nia, StopsThenResumesAfterWaiting)
{
  const ControllerParams p;
  const ScenarioGeometry g;
  NiaController c(p, g);
  JointState s{0, -20.0, p.v_veh_ref, -3.0, 0.0};
  EXPECT_LT(c.decide(s), 0.0);
  EXPECT_EQ(c.state().mode, NiaMode::Stopped);

  double stopped_at = -1.0, resumed_at = -1.0;
  const double dt = 0.05;
  for (int k = 0; k < 400 && resumed_at < 0.0; ++k) {
    const double u = c.decide(s);
    if (stopped_at < 0.0 && s.v_veh < kVehicleStoppedSpeed) stopped_at = s.t;
    if (c.state().mode == NiaMode::Resuming) resumed_at = s.t;
    s = step(s, u, 0.0, dt);
    s.v_veh = std::max(s.v_veh, 0.0);
    s.t = (k + 1) * dt;
  }
  ASSERT_GE(stopped_at, 0.0);
  ASSERT_GE(resumed_at, 0.0);
  EXPECT_NEAR(resumed_at - stopped_at, p.t_NIA, dt + 1e-9);
  EXPECT_LT(s.x_veh, g.conflict_x - p.d_min);

  // While resuming it creeps toward the slow speed.
  s = drive(s, 2.0, [&](const JointState &x) { return c.decide(x); });
  EXPECT_EQ(c.state().mode, NiaMode::Resuming);
  EXPECT_GT(s.v_veh, 0.5);
  EXPECT_LE(s.v_veh, p.slow_speed + 1e-6);
}

TEST(Nia, CruisesWhenPedestrianFarFromLane)
{
  const ControllerParams p;
  NiaController c(p, {});
  const JointState s{0, -20.0, p.v_veh_ref, -6.0, 0.0};
  EXPECT_EQ(c.decide(s), 0.0);
  EXPECT_EQ(c.state().mode, NiaMode::Cruise);
}

TEST(Nia, IgnoresIntention)
{
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> ux(-40, 5), uv(0, 12), uy(-8, 3);
  auto a = make_controller(ControllerKind::Nia, {}, {});
  auto b = make_controller(ControllerKind::Nia, {}, {});
  for (int i = 0; i < 200; ++i) {
    const JointState s{0.05 * i, ux(rng), uv(rng), uy(rng), 0.0};
    EXPECT_EQ(a->decide(s, 0.0), b->decide(s, 1.0));
  }
}

TEST(Rbdm, StopForPedestrianOnRoad)
{
  RbdmController c({}, {});
  EXPECT_LT(c.decide({0, -20.0, 8.33, 0.0, 1.0}, 0.0), 0.0);
  EXPECT_EQ(c.last_rule(), RbdmRule::Stop);
}

TEST(Rbdm, YieldNeedsIntention)
{
  const ControllerParams p;
  RbdmController c(p, {});
  const JointState s{0, -20.0, p.v_veh_ref, -5.0, 0.0};
  EXPECT_LT(c.decide(s, 1.0), 0.0);
  EXPECT_EQ(c.last_rule(), RbdmRule::Yield);
  c.reset();
  EXPECT_EQ(c.decide(s, 0.0), 0.0);
  EXPECT_EQ(c.last_rule(), RbdmRule::Track);
}

TEST(Rbdm, SlowWhenConflictIsDistant)
{
  const ControllerParams p;
  RbdmController c(p, {});
  const double u = c.decide({0, -60.0, p.v_veh_ref, -3.0, 0.0}, 1.0);
  EXPECT_EQ(c.last_rule(), RbdmRule::Slow);
  EXPECT_EQ(u, track_speed({0, -60.0, p.v_veh_ref, -3.0, 0.0}, p, p.slow_speed));
}

TEST(Rbdm, TimesOutOfAStandOff)
{
  const ControllerParams p;
  RbdmController c(p, {});
  JointState s{0, -20.0, p.v_veh_ref, -3.0, 0.0};
  s = drive(s, 4.0, [&](const JointState &x) { return c.decide(x, 1.0); });
  EXPECT_EQ(c.last_rule(), RbdmRule::Yield);
  s = drive(s, p.t_NIA + 0.5, [&](const JointState &x) { return c.decide(x, 1.0); });
  EXPECT_EQ(c.last_rule(), RbdmRule::Timeout);
  s = drive(s, 1.5, [&](const JointState &x) { return c.decide(x, 1.0); });
  EXPECT_EQ(c.last_rule(), RbdmRule::Timeout);
  EXPECT_GT(s.v_veh, 0.5);
}

TEST(Baselines, OutputsInsideBounds)
{
  const ControllerParams p;
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> ux(-60, 10), uv(0, 12), uy(-10, 4), uvp(0, 1.5), ui(0, 1);
  for (auto kind : {ControllerKind::Nia, ControllerKind::Rbdm}) {
    auto c = make_controller(kind, p, {});
    for (int i = 0; i < 500; ++i) {
      const JointState s{0.05 * i, ux(rng), uv(rng), uy(rng), uvp(rng)};
      const double u = c->decide(s, ui(rng));
      EXPECT_GE(u, p.a_min);
      EXPECT_LE(u, p.a_max);
    }
  }
}

TEST(ControllerKind, Names)
{
  for (auto k : {ControllerKind::Iampdm, ControllerKind::Rbdm, ControllerKind::Nia}) {
    EXPECT_EQ(controller_from_string(to_string(k)), k);
  }
  EXPECT_EQ(controller_from_string("RBDM"), ControllerKind::Rbdm);
  EXPECT_THROW(controller_from_string("foo"), std::invalid_argument);
}
