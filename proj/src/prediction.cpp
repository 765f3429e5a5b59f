#include "pedsim/prediction.hpp"

#include <stdexcept>
#include <string>

namespace pedsim {

Vector4 to_vector(const JointState &s) { return {s.x_veh, s.v_veh, s.y_ped, s.v_ped}; }

JointState from_vector(const Eigen::Ref<const Vector4> &v, double t) { return {t, v(0), v(1), v(2), v(3)}; }

Matrix4 system_matrix(double dt)
{
  Matrix4 A;
  // clang-format off
  A << 1, dt, 0, 0,
       0, 1,  0, 0,
       0, 0,  1, dt,
       0, 0,  0, 0;
  // clang-format on
  return A;
}

Vector4 input_matrix(double dt) { return {0.5 * dt * dt, dt, 0.0, 0.0}; }

JointState step(const JointState &s, double u, double z_ped_speed, double dt)
{
  JointState n;
  n.t = s.t + dt;
  n.x_veh = s.x_veh + dt * s.v_veh + 0.5 * dt * dt * u;
  n.v_veh = s.v_veh + dt * u;
  n.y_ped = s.y_ped + dt * s.v_ped;
  n.v_ped = z_ped_speed;
  return n;
}

BatchOperators build_batch(int N, double dt)
{
  if (N < 1) {
    throw std::invalid_argument("build_batch: N must be >= 1");
  }
  const Matrix4 A = system_matrix(dt);
  const Vector4 B = input_matrix(dt);

  // powers[k] = A^k
  std::vector<Matrix4> powers(static_cast<std::size_t>(N) + 1);
  powers[0] = Matrix4::Identity();
  for (int k = 1; k <= N; ++k) {
    powers[k] = A * powers[k - 1];
  }

  BatchOperators ops;
  ops.N = N;
  ops.dt = dt;
  ops.A_cal = Eigen::MatrixXd::Zero(4 * N, 4);
  ops.B_cal = Eigen::MatrixXd::Zero(4 * N, N);
  ops.Z_cal = Eigen::MatrixXd::Zero(4 * N, 4 * N);
  for (int i = 0; i < N; ++i) {
    ops.A_cal.block<4, 4>(4 * i, 0) = powers[i + 1];
    for (int j = 0; j <= i; ++j) {
      ops.B_cal.block<4, 1>(4 * i, j) = powers[i - j] * B;
      ops.Z_cal.block<4, 4>(4 * i, 4 * j) = powers[i - j];
    }
  }
  return ops;
}

std::vector<JointState> predict(const JointState &x0, std::span<const double> u_s, std::span<const double> z_ped,
                                const BatchOperators &ops)
{
  const auto N = static_cast<std::size_t>(ops.N);
  if (u_s.size() != N || z_ped.size() != N) {
    throw std::invalid_argument("predict: sequence lengths must equal N = " + std::to_string(N));
  }
  Eigen::VectorXd u(ops.N);
  Eigen::VectorXd z = Eigen::VectorXd::Zero(4 * ops.N);
  for (int k = 0; k < ops.N; ++k) {
    u(k) = u_s[k];
    z(4 * k + 3) = z_ped[k];
  }
  const Eigen::VectorXd xs = ops.A_cal * to_vector(x0) + ops.B_cal * u + ops.Z_cal * z;

  std::vector<JointState> out;
  out.reserve(N);
  for (int k = 0; k < ops.N; ++k) {
    out.push_back(from_vector(xs.segment<4>(4 * k), x0.t + (k + 1) * ops.dt));
  }
  return out;
}

Rollout rollout_with_ped_model(const JointState &x0, std::span<const double> u_s, const ScenarioGeometry &geometry,
                               const PedModelParams &ped, double dt)
{
  Rollout r;
  r.trajectory.reserve(u_s.size());
  r.z_ped.reserve(u_s.size());
  JointState s = x0;
  for (double u : u_s) {
    const double z = ped_next_velocity(s, geometry, ped);
    s = step(s, u, z, dt);
    r.z_ped.push_back(z);
    r.trajectory.push_back(s);
  }
  return r;
}

}  // namespace pedsim
