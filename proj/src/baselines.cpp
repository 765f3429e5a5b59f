#include "pedsim/baselines.hpp"

#include <algorithm>
#include <cmath>

#include "pedsim/metrics.hpp"

namespace pedsim {

namespace {

bool near_lane(ZoneLabel z) { return z == ZoneLabel::Near || z == ZoneLabel::Crossing; }

bool resolved(const JointState &s, const ScenarioGeometry &g) { return is_ped_passed(s, g) || is_veh_passed(s, g); }

}  // namespace

double velocity_tracking(const JointState &state, const ControllerParams &params)
{
  return track_speed(state, params, params.v_veh_ref);
}

double track_speed(const JointState &state, const ControllerParams &params, double v_target)
{
  return std::clamp(params.k_p * (v_target - state.v_veh), params.a_min, params.a_max);
}

double brake_to_stop(const JointState &state, const ScenarioGeometry &geometry, const ControllerParams &params,
                     double cruise_speed)
{
  const double stop_x = geometry.conflict_x - params.d_min - params.stop_buffer;
  const double dist = stop_x - state.x_veh;
  const double v = std::max(state.v_veh, 0.0);
  if (dist <= 0.3) {
    return std::max(params.a_min, -v / params.dt);
  }
  const double a_req = v * v / (2.0 * dist);
  if (a_req >= 0.9 * params.comfort_decel) {
    return std::max(params.a_min, -a_req);
  }
  // Glide toward the line on a profile that stays under the comfortable deceleration.
  const double v_profile = std::sqrt(2.0 * 0.8 * params.comfort_decel * dist);
  return track_speed(state, params, std::min(cruise_speed, v_profile));
}

std::string_view to_string(NiaMode m)
{
  switch (m) {
    case NiaMode::Cruise: return "cruise";
    case NiaMode::Stopped: return "stopped";
    case NiaMode::Resuming: return "resuming";
  }
  return "?";
}

NiaController::NiaController(ControllerParams params, ScenarioGeometry geometry)
    : params_(params), geometry_(geometry)
{
  params_.validate();
  geometry_.validate();
}

double NiaController::decide(const JointState &s)
{
  const ZoneLabel zone = classify_zone(s.y_ped, geometry_);
  const bool ahead = s.x_veh < geometry_.conflict_x;
  const bool done = resolved(s, geometry_);

  switch (state_.mode) {
    case NiaMode::Cruise:
      if (!done && ahead && near_lane(zone) && ttc_metric(s, geometry_) < params_.ttc_threshold) {
        state_ = {NiaMode::Stopped, 0.0, std::nullopt};
      }
      break;
    case NiaMode::Stopped:
      if (is_veh_passed(s, geometry_)) {
        state_ = {};
        break;
      }
      if (s.v_veh < kVehicleStoppedSpeed) {
        if (!state_.stopped_since) {
          state_.stopped_since = s.t;
        }
        state_.stop_clock = s.t - *state_.stopped_since;
      }
      if (state_.stop_clock >= params_.t_NIA && zone != ZoneLabel::Crossing) {
        state_.mode = NiaMode::Resuming;
      }
      break;
    case NiaMode::Resuming:
      if (done) {
        state_ = {};
      } else if (ahead && zone == ZoneLabel::Crossing) {
        state_ = {NiaMode::Stopped, 0.0, std::nullopt};
      }
      break;
  }

  switch (state_.mode) {
    case NiaMode::Stopped: return brake_to_stop(s, geometry_, params_, params_.v_veh_ref);
    case NiaMode::Resuming: return track_speed(s, params_, params_.slow_speed);
    case NiaMode::Cruise: break;
  }
  return velocity_tracking(s, params_);
}

std::string_view to_string(RbdmRule r)
{
  switch (r) {
    case RbdmRule::Stop: return "stop";
    case RbdmRule::Yield: return "yield";
    case RbdmRule::Slow: return "slow";
    case RbdmRule::Track: return "track";
    case RbdmRule::Timeout: return "timeout";
  }
  return "?";
}

RbdmController::RbdmController(ControllerParams params, ScenarioGeometry geometry)
    : params_(params), geometry_(geometry), rules_(RbdmRuleSet::from(params))
{
  params_.validate();
  geometry_.validate();
}

void RbdmController::reset()
{
  rule_ = RbdmRule::Track;
  yielding_ = false;
  timed_out_ = false;
  standoff_since_.reset();
}

double RbdmController::decide(const JointState &s, double intention)
{
  const ZoneLabel zone = classify_zone(s.y_ped, geometry_);
  const bool ahead = s.x_veh < geometry_.conflict_x;
  const bool done = resolved(s, geometry_);
  const bool wants = std::clamp(intention, 0.0, 1.0) > rules_.intention_threshold;
  const double ttc = ttc_metric(s, geometry_);

  if (done) {
    yielding_ = false;
    timed_out_ = false;
    standoff_since_.reset();
  } else if (s.v_veh < kVehicleStoppedSpeed && std::abs(s.v_ped) < params_.standstill_speed) {
    if (!standoff_since_) {
      standoff_since_ = s.t;
    }
    if (s.t - *standoff_since_ >= params_.t_NIA && zone != ZoneLabel::Crossing) {
      timed_out_ = true;
    }
  } else {
    standoff_since_.reset();
  }

  const bool off_road = zone == ZoneLabel::Safe || zone == ZoneLabel::Near;
  if (!done && ahead && zone == ZoneLabel::Crossing) {
    rule_ = RbdmRule::Stop;
  } else if (!done && timed_out_) {
    rule_ = RbdmRule::Timeout;
  } else if (!done && ahead && off_road && wants && (ttc < rules_.ttc_threshold || yielding_)) {
    rule_ = RbdmRule::Yield;
  } else if (!done && ahead && zone == ZoneLabel::Near && wants) {
    rule_ = RbdmRule::Slow;
  } else {
    rule_ = RbdmRule::Track;
  }
  yielding_ = rule_ == RbdmRule::Yield || (rule_ == RbdmRule::Stop && yielding_);

  switch (rule_) {
    case RbdmRule::Stop:
    case RbdmRule::Yield: return brake_to_stop(s, geometry_, params_, params_.v_veh_ref);
    case RbdmRule::Slow:
    case RbdmRule::Timeout: return track_speed(s, params_, rules_.slow_speed);
    case RbdmRule::Track: break;
  }
  return velocity_tracking(s, params_);
}

}  // namespace pedsim
