#include "pedsim/scripts.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace pedsim {

std::string_view to_string(ScenarioKind k)
{
  switch (k) {
    case ScenarioKind::Crossing: return "crossing";
    case ScenarioKind::Remaining: return "remaining";
    case ScenarioKind::DelayedCrossing: return "delayed_crossing";
    case ScenarioKind::DelayedRemaining: return "delayed_remaining";
  }
  return "?";
}

ScenarioKind scenario_from_string(std::string_view s)
{
  for (auto k : {ScenarioKind::Crossing, ScenarioKind::Remaining, ScenarioKind::DelayedCrossing,
                 ScenarioKind::DelayedRemaining}) {
    if (s == to_string(k)) {
      return k;
    }
  }
  throw std::invalid_argument("scenario: unknown scenario '" + std::string(s) +
                              "' (expected crossing, remaining, delayed_crossing or delayed_remaining)");
}

std::string_view to_string(PedPhase p)
{
  switch (p) {
    case PedPhase::Approach: return "approach";
    case PedPhase::Hesitate: return "hesitate";
    case PedPhase::Commit: return "commit";
    case PedPhase::Yield: return "yield";
    case PedPhase::Done: return "done";
  }
  return "?";
}

IntentionProfile default_intention_profile(ScenarioKind kind)
{
  //                               Approach Hesitate Commit Yield Done
  switch (kind) {
    case ScenarioKind::Crossing: return {1.0, 1.0, 1.0, 0.0, 0.0};
    case ScenarioKind::Remaining: return {0.0, 0.0, 0.0, 0.0, 0.0};
    case ScenarioKind::DelayedCrossing: return {0.0, 0.0, 1.0, 0.0, 0.0};
    case ScenarioKind::DelayedRemaining: return {1.0, 1.0, 1.0, 0.0, 0.0};
  }
  return {};
}

ScenarioScript make_script(ScenarioKind kind, const ScriptParams &params, std::uint64_t seed,
                           const ScenarioGeometry &geometry)
{
  ScenarioScript s;
  s.kind = kind;
  s.wait_point = params.wait_point;
  s.gap_acceptance = params.gap_acceptance;
  s.slow_vehicle_speed = params.slow_vehicle_speed;
  s.intention_profile = default_intention_profile(kind);
  s.rng_seed = seed;

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> point(params.hesitation_point, params.hesitation_sigma);
  std::normal_distribution<double> duration(params.hesitation_duration, params.duration_sigma);
  const double p = params.hesitation_sigma > 0.0 ? point(rng) : params.hesitation_point;
  const double d = params.duration_sigma > 0.0 ? duration(rng) : params.hesitation_duration;
  s.hesitation_point = std::clamp(p, geometry.safe_zone.lo + 0.1, geometry.near_zone.hi - 0.1);
  s.hesitation_duration = std::max(0.0, d);
  return s;
}

ScriptedPedestrian::ScriptedPedestrian(ScenarioScript script, ScenarioGeometry geometry, double v_walk)
    : script_(script), geometry_(geometry), v_walk_(v_walk)
{
}

void ScriptedPedestrian::enter(PedPhase p)
{
  state_.phase = p;
  state_.phase_clock = 0.0;
}

double ScriptedPedestrian::approach_speed(double y, double stop_at) const
{
  // Proportional slow-down over the last stretch so the lagged walker settles at stop_at.
  return std::clamp((stop_at - y) / 0.8, 0.0, v_walk_);
}

bool ScriptedPedestrian::gap_ok(const JointState &s) const
{
  if (is_veh_passed(s, geometry_)) {
    return true;
  }
  const double gap = veh_gap(s, geometry_);
  if (gap < 1.0) {
    return false;
  }
  return s.v_veh < script_.slow_vehicle_speed || gap / s.v_veh >= script_.gap_acceptance;
}

PedCommand ScriptedPedestrian::step(const JointState &s, double dt)
{
  constexpr double kArrived = 0.05;
  const double curb = geometry_.near_curb();
  const bool delayed =
      script_.kind == ScenarioKind::DelayedCrossing || script_.kind == ScenarioKind::DelayedRemaining;

  // Transitions.
  switch (state_.phase) {
    case PedPhase::Approach:
      if (script_.kind == ScenarioKind::Crossing) {
        if (s.y_ped >= geometry_.safe_zone.lo) {
          enter(PedPhase::Commit);
        }
      } else if (script_.kind == ScenarioKind::Remaining) {
        if (script_.wait_point - s.y_ped < kArrived) {
          enter(PedPhase::Yield);
        }
      } else if (delayed && script_.hesitation_point - s.y_ped < kArrived) {
        enter(PedPhase::Hesitate);
      }
      break;
    case PedPhase::Hesitate:
      if (state_.phase_clock >= script_.hesitation_duration) {
        enter(script_.kind == ScenarioKind::DelayedCrossing ? PedPhase::Commit : PedPhase::Yield);
      }
      break;
    case PedPhase::Commit:
      if (is_ped_passed(s, geometry_)) {
        enter(PedPhase::Done);
      }
      break;
    case PedPhase::Yield:
      if (is_veh_passed(s, geometry_)) {
        enter(PedPhase::Done);
      }
      break;
    case PedPhase::Done: break;
  }

  PedCommand cmd;
  switch (state_.phase) {
    case PedPhase::Approach: {
      double stop_at = curb - 0.2;
      if (script_.kind == ScenarioKind::Remaining) {
        stop_at = script_.wait_point;
      } else if (delayed) {
        stop_at = script_.hesitation_point;
      }
      cmd.target_speed = approach_speed(s.y_ped, stop_at);
      break;
    }
    case PedPhase::Hesitate:
    case PedPhase::Yield: cmd.target_speed = 0.0; break;
    case PedPhase::Commit:
      // Step onto the road only when the oncoming gap is acceptable.
      if (s.y_ped >= curb || gap_ok(s)) {
        cmd.target_speed = v_walk_;
      } else {
        cmd.target_speed = approach_speed(s.y_ped, curb - 0.2);
      }
      break;
    case PedPhase::Done: cmd.target_speed = v_walk_; break;
  }
  // Outside the signaling range nothing is communicated.
  cmd.intention = s.y_ped >= geometry_.safe_zone.lo ? intention() : 0.0;
  state_.phase_clock += dt;
  return cmd;
}

}  // namespace pedsim
