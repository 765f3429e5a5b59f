#ifndef PEDSIM_PREDICTION_HPP_
#define PEDSIM_PREDICTION_HPP_

#include <Eigen/Core>

#include <span>
#include <vector>

#include "pedsim/pedestrian_model.hpp"
#include "pedsim/scenario.hpp"

namespace pedsim {

using Vector4 = Eigen::Vector4d;
using Matrix4 = Eigen::Matrix4d;

Vector4 to_vector(const JointState &s);
JointState from_vector(const Eigen::Ref<const Vector4> &v, double t);

/// Single-step system matrices. The pedestrian-speed row of A is zero: the
/// speed is fully replaced by the disturbance entry every step.
Matrix4 system_matrix(double dt);
Vector4 input_matrix(double dt);

/// One step of the joint dynamics with input u and disturbance speed z_ped_speed.
JointState step(const JointState &state, double u, double z_ped_speed, double dt);

/// Stacked N-step prediction operators.
struct BatchOperators
{
  Eigen::MatrixXd A_cal;  // 4N x 4
  Eigen::MatrixXd B_cal;  // 4N x N
  Eigen::MatrixXd Z_cal;  // 4N x 4N
  int N{0};
  double dt{0.0};
};

BatchOperators build_batch(int N, double dt);

/// x_s = A_cal x0 + B_cal u_s + Z_cal z_s, where z_s carries only pedestrian
/// speeds. Returns the N predicted states after x0. Throws
/// std::invalid_argument on a length mismatch.
std::vector<JointState> predict(const JointState &x0, std::span<const double> u_s, std::span<const double> z_ped,
                                const BatchOperators &ops);

struct Rollout
{
  std::vector<JointState> trajectory;  // N states after x0
  std::vector<double> z_ped;           // realized pedestrian-speed disturbances
};

/// Forward simulation where each disturbance entry comes from the pedestrian
/// model evaluated at the current predicted state.
Rollout rollout_with_ped_model(const JointState &x0, std::span<const double> u_s, const ScenarioGeometry &geometry,
                               const PedModelParams &ped, double dt);

}  // namespace pedsim

#endif  // PEDSIM_PREDICTION_HPP_
