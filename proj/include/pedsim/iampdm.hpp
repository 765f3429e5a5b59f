#ifndef PEDSIM_IAMPDM_HPP_
#define PEDSIM_IAMPDM_HPP_

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "pedsim/baselines.hpp"
#include "pedsim/prediction.hpp"
#include "pedsim/scenario.hpp"

namespace pedsim {

/// Safety weight and minimum distance after intention scaling.
struct SafetyTerms
{
  double w_safe{0.0};
  double d_min{0.0};
};

/// Outside the crossing zone both terms scale with the intention; inside it
/// they stay at their nominal values.
SafetyTerms apply_intention(const ControllerParams &params, double intention, ZoneLabel zone);

struct MpcProblem
{
  JointState x0;
  ControllerParams params;
  ScenarioGeometry geometry;
  double intention_effective{1.0};
  /// Pedestrian-speed disturbances for PredictionMode::FrozenZ. When empty the
  /// solver freezes the disturbances of a rollout of its first seed.
  std::vector<double> frozen_z;

  ZoneLabel zone() const { return classify_zone(x0.y_ped, geometry); }
  SafetyTerms safety() const { return apply_intention(params, intention_effective, zone()); }
};

struct CostBreakdown
{
  double total{0.0};
  double com{0.0};
  double ref{0.0};
  double safe{0.0};
};

/// J_MPC = J_com + J_ref + J_safe for the given input sequence, with the
/// trajectory produced per params.prediction_mode. No clipping is applied.
CostBreakdown eval_cost(std::span<const double> u_s, const MpcProblem &problem);

/// Predicted trajectory for u_s under the problem's prediction mode.
std::vector<JointState> predicted_trajectory(std::span<const double> u_s, const MpcProblem &problem);

enum class SolveStatus { Optimal, MaxIters, Infeasible };
std::string_view to_string(SolveStatus s);

struct MpcSolution
{
  std::vector<double> u;                  // u_s*, always inside [a_min, a_max]
  std::vector<JointState> predicted;      // N states after x0
  std::vector<double> z_ped;              // disturbances used for the prediction
  CostBreakdown cost;
  int iterations{0};
  double constraint_violation{0.0};       // max residual over (7c)-(7e)
  SolveStatus status{SolveStatus::Optimal};
  std::vector<double> cost_history;       // best feasible cost after each iteration
};

struct SolverOptions
{
  double fd_step{1e-4};
  int max_iters_per_stage{60};
  int stages{3};
  double feas_tol{1e-6};
  double clip_penalty{10.0};
  std::size_t lattice_limit{243};  // enumerate {a_min, 0, a_max}^N seeds up to this count
};

/// Box-projected gradient descent on a log-barrier merit with a clip-aware
/// rollout. Returned inputs keep every predicted speed in [0, v_veh_max] by
/// construction; the distance constraint is certified by a post-check.
MpcSolution solve(const MpcProblem &problem, const std::optional<std::vector<double>> &warm_start = std::nullopt,
                  const SolverOptions &options = {});

/// Effective-intention bookkeeping for the decision loop.
class IntentionTracker
{
public:
  void reset() { onset_.reset(); }

  /// Updates the onset clock and returns the intention the controller should use.
  double update(const JointState &state, double intention_raw, const ScenarioGeometry &geometry,
                const ControllerParams &params);

  std::optional<double> onset() const { return onset_; }
  bool discounting() const { return discounting_; }

private:
  std::optional<double> onset_;
  bool discounting_{false};
};

struct IampdmDiagnostics
{
  bool used_mpc{false};
  double intention_effective{0.0};
  SafetyTerms safety;
  CostBreakdown cost;
  int iterations{0};
  double constraint_violation{0.0};
  SolveStatus status{SolveStatus::Optimal};
};

/// Receding-horizon decision loop. Owns the warm start; not reentrant.
class IampdmController
{
public:
  IampdmController(ControllerParams params, ScenarioGeometry geometry, SolverOptions options = {});

  void reset();
  double observe(const JointState &state, double intention_raw);
  double decide(const JointState &state, double intention_raw);

  const IampdmDiagnostics &diagnostics() const { return diag_; }
  const std::optional<MpcSolution> &last_solution() const { return last_; }

private:
  ControllerParams params_;
  ScenarioGeometry geometry_;
  SolverOptions options_;
  IntentionTracker tracker_;
  double intention_eff_{0.0};
  std::optional<std::vector<double>> warm_;
  std::vector<double> z_prev_;
  std::optional<MpcSolution> last_;
  IampdmDiagnostics diag_;
};

}  // namespace pedsim

#endif  // PEDSIM_IAMPDM_HPP_
