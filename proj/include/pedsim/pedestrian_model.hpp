#ifndef PEDSIM_PEDESTRIAN_MODEL_HPP_
#define PEDSIM_PEDESTRIAN_MODEL_HPP_

#include "pedsim/scenario.hpp"

namespace pedsim {

struct PedModelParams
{
  double c{2.0};          // sigmoid offset [s]
  double v_ped_ref{1.4};  // [m/s]
  double K_d{1.0};        // discount rate [1/s]
  double v_eps{0.05};     // velocity floor in the TTC division [m/s]

  static PedModelParams from(const ControllerParams &p) { return {p.c, p.v_ped_ref, p.K_d, p.v_eps}; }
};

/// Signaled crossing intention and the interaction onset time it is discounted from.
struct IntentionSignal
{
  double value{0.0};  // [0, 1]
  double t0{0.0};
};

/// Crossing gain 1 / (1 + exp(-ttc + c)), in (0, 1) and strictly increasing in ttc.
double crossing_gain(double ttc, double c);

/// Pedestrian-model TTC: (x_ped - x_veh) / max(v_veh, v_eps) - (y_veh - y_ped) / v_ped_ref.
double ttc_mpc(const JointState &state, const ScenarioGeometry &geometry, const PedModelParams &params);

/// Pedestrian speed chosen for the next step.
double ped_next_velocity(const JointState &state, const ScenarioGeometry &geometry, const PedModelParams &params);

/// value * 0.9^(K_d * (t - t0)). Throws std::domain_error when t < t0.
double discount_intention(const IntentionSignal &signal, double K_d, double t);

}  // namespace pedsim

#endif  // PEDSIM_PEDESTRIAN_MODEL_HPP_
