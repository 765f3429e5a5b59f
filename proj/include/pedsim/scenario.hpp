#ifndef PEDSIM_SCENARIO_HPP_
#define PEDSIM_SCENARIO_HPP_

#include <string>
#include <string_view>

namespace pedsim {

// Frame convention: the conflict point sits at the origin. The vehicle drives
// along +x (x_veh < 0 before the conflict), the pedestrian walks along +y
// (y_ped < 0 before the conflict).

/// Joint vehicle/pedestrian state [x_veh, v_veh, y_ped, v_ped] plus time.
struct JointState
{
  double t{0.0};
  double x_veh{0.0};  // [m]
  double v_veh{0.0};  // [m/s]
  double y_ped{0.0};  // [m]
  double v_ped{0.0};  // [m/s]

  bool finite() const;
  bool operator==(const JointState &) const = default;
};

/// Half-open interval [lo, hi).
struct Interval
{
  double lo{0.0};
  double hi{0.0};

  bool contains(double v) const { return v >= lo && v < hi; }
  double mid() const { return 0.5 * (lo + hi); }
};

struct ScenarioGeometry
{
  double conflict_x{0.0};
  double conflict_y{0.0};
  double x_ped_path{0.0};  // road-axis coordinate of the crossing line
  double y_veh_lane{0.0};  // crossing-axis coordinate of the lane center
  Interval safe_zone{-7.0, -4.0};
  Interval near_zone{-4.0, -2.0};
  Interval crossing_zone{-2.0, 2.0};
  double road_half_width{2.0};
  double veh_clearance{2.0};   // vehicle counts as passed this far beyond conflict_x
  double sensing_range{50.0};  // interaction onset requires the vehicle within this gap

  double far_curb() const { return crossing_zone.hi; }
  double near_curb() const { return crossing_zone.lo; }

  /// Throws std::invalid_argument naming the broken invariant.
  void validate() const;
};

enum class ZoneLabel { Approach, Safe, Near, Crossing, Passed };

std::string_view to_string(ZoneLabel z);
ZoneLabel zone_from_string(std::string_view s);

/// Total over the pedestrian axis: every y maps to exactly one label.
ZoneLabel classify_zone(double y_ped, const ScenarioGeometry &geometry);

bool is_ped_passed(const JointState &state, const ScenarioGeometry &geometry);
bool is_veh_passed(const JointState &state, const ScenarioGeometry &geometry);

/// Remaining nonnegative gaps to the conflict point.
double veh_gap(const JointState &state, const ScenarioGeometry &geometry);
double ped_gap(const JointState &state, const ScenarioGeometry &geometry);

enum class PredictionMode { Rollout, FrozenZ };
enum class RefCostForm { Deviation, Literal };

std::string_view to_string(PredictionMode m);
std::string_view to_string(RefCostForm f);

/// Controller tuning vector plus model constants shared by all three controllers.
struct ControllerParams
{
  // IAMPDM weights
  double w_safe{400.0};
  double w_com{1.0};
  double w_ref_ped{2.0};
  double w_ref_veh{1.0};
  double d_min{4.0};        // [m]
  double K_d{1.0};          // [1/s]
  double v_veh_max{12.0};   // [m/s]
  double a_min{-4.0};       // [m/s^2]
  double a_max{2.0};        // [m/s^2]

  // pedestrian model
  double c{2.0};            // [s]
  double v_ped_ref{1.4};    // [m/s]
  double v_eps{0.05};       // [m/s]

  // horizon
  int N{20};
  double dt{0.2};           // [s]

  double v_veh_ref{8.33};   // [m/s]
  double k_p{1.0};          // velocity tracking gain [1/s]

  // baselines
  double t_NIA{6.0};        // [s]
  double ttc_threshold{4.0};
  double intention_threshold{0.5};
  double slow_speed{3.0};
  double comfort_decel{2.5};
  double stop_buffer{0.5};  // extra stand-off beyond d_min at a stop line

  double standstill_speed{0.05};  // |v_ped| below this counts as standing
  double eps_safe{1e-6};          // [m^2]

  PredictionMode prediction_mode{PredictionMode::Rollout};
  RefCostForm ref_cost_form{RefCostForm::Deviation};

  void validate() const;
};

}  // namespace pedsim

#endif  // PEDSIM_SCENARIO_HPP_
