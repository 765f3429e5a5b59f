#ifndef PEDSIM_METRICS_HPP_
#define PEDSIM_METRICS_HPP_

#include <span>

#include "pedsim/scenario.hpp"

namespace pedsim {

inline constexpr double kKappa = 0.05;       // standstill guard [m/s]
inline constexpr double kSafetyTime = 1.0;   // t_safe [s]

struct MetricOptions
{
  double kappa{kKappa};
  double t_safe{kSafetyTime};
  bool clamp_gaps{true};  // false: signed distances to the conflict point
};

/// Surrogate TTC: (gap_veh + gap_ped) / max(v_veh, kappa).
double ttc_metric(const JointState &state, const ScenarioGeometry &geometry, const MetricOptions &opt = {});

/// Deceleration to safety time: 0.5 (v_ped^2 + v_veh^2) / (gap_veh + gap_ped + v_veh t_safe),
/// with the denominator floored at kappa.
double dst_metric(const JointState &state, const ScenarioGeometry &geometry, const MetricOptions &opt = {});

/// Trapezoidal time average of samples (t_i, v_i) over [t.front(), t_end].
/// Samples beyond t_end are ignored; the last sample is held if t_end lies past it.
/// Throws std::invalid_argument for an empty or zero-length window.
double time_average(std::span<const double> t, std::span<const double> values, double t_end);

}  // namespace pedsim

#endif  // PEDSIM_METRICS_HPP_
