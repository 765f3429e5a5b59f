#include "pedsim/metrics.hpp"

#include <algorithm>
#include <stdexcept>

namespace pedsim {

namespace {

struct Gaps
{
  double veh;
  double ped;
};

Gaps gaps(const JointState &s, const ScenarioGeometry &g, bool clamp)
{
  if (clamp) {
    return {veh_gap(s, g), ped_gap(s, g)};
  }
  return {g.conflict_x - s.x_veh, g.conflict_y - s.y_ped};
}

}  // namespace

double ttc_metric(const JointState &state, const ScenarioGeometry &geometry, const MetricOptions &opt)
{
  const Gaps d = gaps(state, geometry, opt.clamp_gaps);
  return (d.veh + d.ped) / std::max(state.v_veh, opt.kappa);
}

double dst_metric(const JointState &state, const ScenarioGeometry &geometry, const MetricOptions &opt)
{
  const Gaps d = gaps(state, geometry, opt.clamp_gaps);
  const double num = 0.5 * (state.v_ped * state.v_ped + state.v_veh * state.v_veh);
  const double den = d.veh + d.ped + state.v_veh * opt.t_safe;
  return num / std::max(den, opt.kappa);
}

double time_average(std::span<const double> t, std::span<const double> values, double t_end)
{
  if (t.empty() || t.size() != values.size()) {
    throw std::invalid_argument("time_average: need matching, nonempty sample vectors");
  }
  const double t0 = t.front();
  if (!(t_end > t0)) {
    throw std::invalid_argument("time_average: empty averaging window (T_end == t0)");
  }
  double integral = 0.0;
  std::size_t i = 0;
  for (; i + 1 < t.size() && t[i + 1] <= t_end; ++i) {
    integral += 0.5 * (values[i] + values[i + 1]) * (t[i + 1] - t[i]);
  }
  if (t[i] < t_end) {
    // Partial last interval: interpolate if a later sample exists, otherwise hold.
    double v_end = values[i];
    if (i + 1 < t.size()) {
      const double w = (t_end - t[i]) / (t[i + 1] - t[i]);
      v_end = values[i] + w * (values[i + 1] - values[i]);
    }
    integral += 0.5 * (values[i] + v_end) * (t_end - t[i]);
  }
  return integral / (t_end - t0);
}

}  // namespace pedsim
