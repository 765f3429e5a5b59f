#include "pedsim/pedestrian_model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pedsim {

double crossing_gain(double ttc, double c)
{
  // Evaluated on the side that cannot overflow.
  const double s = ttc - c;
  if (s >= 0.0) {
    return 1.0 / (1.0 + std::exp(-s));
  }
  const double e = std::exp(s);
  return e / (1.0 + e);
}

double ttc_mpc(const JointState &s, const ScenarioGeometry &g, const PedModelParams &p)
{
  const double veh_term = (g.x_ped_path - s.x_veh) / std::max(s.v_veh, p.v_eps);
  const double ped_term = (g.y_veh_lane - s.y_ped) / p.v_ped_ref;
  return veh_term - ped_term;
}

double ped_next_velocity(const JointState &s, const ScenarioGeometry &g, const PedModelParams &p)
{
  return crossing_gain(ttc_mpc(s, g, p), p.c) * p.v_ped_ref;
}

double discount_intention(const IntentionSignal &signal, double K_d, double t)
{
  if (t < signal.t0) {
    throw std::domain_error("discount_intention: t precedes the interaction onset t0");
  }
  return signal.value * std::pow(0.9, K_d * (t - signal.t0));
}

}  // namespace pedsim
