#include "pedsim/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pedsim {

bool JointState::finite() const
{
  return std::isfinite(t) && std::isfinite(x_veh) && std::isfinite(v_veh) && std::isfinite(y_ped) &&
         std::isfinite(v_ped);
}

void ScenarioGeometry::validate() const
{
  auto check = [](bool ok, const char *what) {
    if (!ok) {
      throw std::invalid_argument(what);
    }
  };
  check(safe_zone.lo < safe_zone.hi, "geometry.safe_zone: lo must be < hi");
  check(near_zone.lo < near_zone.hi, "geometry.near_zone: lo must be < hi");
  check(crossing_zone.lo < crossing_zone.hi, "geometry.crossing_zone: lo must be < hi");
  check(safe_zone.hi <= near_zone.lo, "geometry.near_zone: must lie after safe_zone");
  check(near_zone.hi <= crossing_zone.lo, "geometry.crossing_zone: must lie after near_zone");
  check(crossing_zone.contains(conflict_y), "geometry.conflict_y: must lie inside crossing_zone");
  check(road_half_width > 0.0, "geometry.road_half_width: must be > 0");
  check(veh_clearance >= 0.0, "geometry.veh_clearance: must be >= 0");
  check(sensing_range > 0.0, "geometry.sensing_range: must be > 0");
}

std::string_view to_string(ZoneLabel z)
{
  switch (z) {
    case ZoneLabel::Approach: return "Approach";
    case ZoneLabel::Safe: return "Safe";
    case ZoneLabel::Near: return "Near";
    case ZoneLabel::Crossing: return "Crossing";
    case ZoneLabel::Passed: return "Passed";
  }
  return "?";
}

ZoneLabel zone_from_string(std::string_view s)
{
  for (auto z : {ZoneLabel::Approach, ZoneLabel::Safe, ZoneLabel::Near, ZoneLabel::Crossing, ZoneLabel::Passed}) {
    if (to_string(z) == s) {
      return z;
    }
  }
  throw std::invalid_argument("unknown zone label: " + std::string(s));
}

// Gaps between configured bands are absorbed by the band farther from the lane.
ZoneLabel classify_zone(double y_ped, const ScenarioGeometry &g)
{
  if (y_ped < g.safe_zone.lo) {
    return ZoneLabel::Approach;
  }
  if (y_ped >= g.crossing_zone.hi) {
    return ZoneLabel::Passed;
  }
  if (y_ped >= g.crossing_zone.lo) {
    return ZoneLabel::Crossing;
  }
  if (y_ped >= g.near_zone.lo) {
    return ZoneLabel::Near;
  }
  return ZoneLabel::Safe;
}

bool is_ped_passed(const JointState &s, const ScenarioGeometry &g) { return s.y_ped >= g.far_curb(); }

bool is_veh_passed(const JointState &s, const ScenarioGeometry &g)
{
  return s.x_veh > g.conflict_x + g.veh_clearance;
}

double veh_gap(const JointState &s, const ScenarioGeometry &g) { return std::max(0.0, g.conflict_x - s.x_veh); }

double ped_gap(const JointState &s, const ScenarioGeometry &g) { return std::max(0.0, g.conflict_y - s.y_ped); }

std::string_view to_string(PredictionMode m) { return m == PredictionMode::Rollout ? "rollout" : "frozen_z"; }

std::string_view to_string(RefCostForm f) { return f == RefCostForm::Deviation ? "deviation" : "literal"; }

void ControllerParams::validate() const
{
  auto check = [](bool ok, const char *what) {
    if (!ok) {
      throw std::invalid_argument(what);
    }
  };
  check(w_safe >= 0 && w_com >= 0 && w_ref_ped >= 0 && w_ref_veh >= 0, "params: weights must be nonnegative");
  check(a_min < 0.0, "params.a_min: must be < 0");
  check(a_max > 0.0, "params.a_max: must be > 0");
  check(d_min > 0.0, "params.d_min: must be > 0");
  check(K_d >= 0.0, "params.K_d: must be >= 0");
  check(N >= 1, "params.N: must be >= 1");
  check(dt > 0.0, "params.dt: must be > 0");
  check(v_ped_ref > 0.0, "params.v_ped_ref: must be > 0");
  check(v_eps > 0.0, "params.v_eps: must be > 0");
  check(v_veh_max > 0.0, "params.v_veh_max: must be > 0");
  check(v_veh_ref >= 0.0 && v_veh_ref <= v_veh_max, "params.v_veh_ref: must lie in [0, v_veh_max]");
  check(k_p > 0.0, "params.k_p: must be > 0");
  check(t_NIA >= 0.0, "params.t_NIA: must be >= 0");
  check(ttc_threshold > 0.0, "params.ttc_threshold: must be > 0");
  check(intention_threshold > 0.0 && intention_threshold <= 1.0,
        "params.intention_threshold: must lie in (0, 1]");
  check(slow_speed > 0.0 && slow_speed < v_veh_ref, "params.slow_speed: must lie in (0, v_veh_ref)");
  check(comfort_decel > 0.0, "params.comfort_decel: must be > 0");
  check(eps_safe > 0.0, "params.eps_safe: must be > 0");
}

}  // namespace pedsim
