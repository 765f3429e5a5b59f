#ifndef PEDSIM_BASELINES_HPP_
#define PEDSIM_BASELINES_HPP_

#include <optional>
#include <string_view>

#include "pedsim/scenario.hpp"

namespace pedsim {

/// Speed below which the vehicle counts as stopped for wait clocks [m/s].
inline constexpr double kVehicleStoppedSpeed = 0.1;

/// u = clamp(k_p (v_veh_ref - v_veh), a_min, a_max).
double velocity_tracking(const JointState &state, const ControllerParams &params);

/// Command that brings the vehicle to rest at conflict_x - d_min - stop_buffer.
/// Uses the comfortable deceleration unless the remaining distance needs more
/// (up to |a_min|); far from the line it tracks at most cruise_speed.
double brake_to_stop(const JointState &state, const ScenarioGeometry &geometry, const ControllerParams &params,
                     double cruise_speed);

/// Proportional tracking of an arbitrary reference speed.
double track_speed(const JointState &state, const ControllerParams &params, double v_target);

enum class NiaMode { Cruise, Stopped, Resuming };
std::string_view to_string(NiaMode m);

struct NiaState
{
  NiaMode mode{NiaMode::Cruise};
  double stop_clock{0.0};               // time spent at standstill in Stopped [s]
  std::optional<double> stopped_since;  // start of the current standstill
};

/// Non-interactive baseline: stops for any pedestrian close to the lane, waits
/// t_NIA, then creeps on at slow_speed. Takes no intention input.
class NiaController
{
public:
  NiaController(ControllerParams params, ScenarioGeometry geometry);

  void reset() { state_ = {}; }
  double decide(const JointState &state);
  const NiaState &state() const { return state_; }

private:
  ControllerParams params_;
  ScenarioGeometry geometry_;
  NiaState state_;
};

enum class RbdmRule { Stop, Yield, Slow, Track, Timeout };
std::string_view to_string(RbdmRule r);

struct RbdmRuleSet
{
  double ttc_threshold{4.0};
  double intention_threshold{0.5};
  double slow_speed{3.0};

  static RbdmRuleSet from(const ControllerParams &p) { return {p.ttc_threshold, p.intention_threshold, p.slow_speed}; }
};

/// Rule-based intention-aware baseline. Rules in priority order:
///   Stop    pedestrian in the crossing zone ahead of the vehicle
///   Timeout vehicle and pedestrian both standing for t_NIA, pedestrian off the road
///   Yield   pedestrian in safe/near zone, TTC below threshold, intention above threshold
///           (held until the intention drops, the pedestrian leaves, or the timeout fires)
///   Slow    pedestrian in near zone, intention above threshold, TTC at or above threshold
///   Track   otherwise
class RbdmController
{
public:
  RbdmController(ControllerParams params, ScenarioGeometry geometry);

  void reset();
  double decide(const JointState &state, double intention);
  RbdmRule last_rule() const { return rule_; }

private:
  ControllerParams params_;
  ScenarioGeometry geometry_;
  RbdmRuleSet rules_;
  RbdmRule rule_{RbdmRule::Track};
  bool yielding_{false};
  bool timed_out_{false};
  std::optional<double> standoff_since_;
};

}  // namespace pedsim

#endif  // PEDSIM_BASELINES_HPP_
