#ifndef PEDSIM_SIM_HPP_
#define PEDSIM_SIM_HPP_

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pedsim/controller.hpp"
#include "pedsim/scripts.hpp"

namespace pedsim {

enum class Outcome { PedFirst, VehFirst, Timeout };
std::string_view to_string(Outcome o);
Outcome outcome_from_string(std::string_view s);

struct TraceRecord
{
  JointState state;            // plant state at the start of the tick
  double u_cmd{0.0};           // command held over [t, t + dt_sim)
  double ped_target{0.0};      // pedestrian target speed over the same interval
  double intention_raw{0.0};
  double intention_eff{0.0};
  ZoneLabel zone{ZoneLabel::Approach};
  bool controller_tick{false};  // decide() ran on this tick
  ControllerDiagnostics diag;  // diagnostics of the latest decision
  std::vector<std::string> flags;
};

struct EpisodeTrace
{
  std::string scenario;
  std::string controller;
  std::uint64_t seed{0};
  double dt_sim{0.05};
  std::vector<TraceRecord> records;
  double T_end{0.0};
  Outcome outcome{Outcome::Timeout};
  std::string error;  // nonempty when the episode aborted
};

struct SimConfig
{
  double dt_sim{0.05};
  int controller_every{4};  // controller period = controller_every * dt_sim
  double T_max{120.0};
  double ped_lag{0.3};      // pedestrian first-order speed lag [s]
  JointState initial{0.0, -45.0, 8.33, -6.5, 1.2};

  /// Throws std::invalid_argument naming the offending field.
  void validate(const ControllerParams &params) const;
};

/// Fixed-step closed loop around one controller. The pedestrian command is
/// supplied per tick, so scripted and human pedestrians share the same plant.
class EpisodeRunner
{
public:
  EpisodeRunner(ControllerKind kind, const ControllerParams &params, const ScenarioGeometry &geometry,
                const SimConfig &sim, const SolverOptions &solver = {});

  void reset();

  /// Records the current tick and advances the plant by dt_sim unless the
  /// episode ends on this tick. `released` tells whether the pedestrian side no
  /// longer needs to cross.
  const TraceRecord &step(const PedCommand &cmd, bool released);

  /// Wall-clock budget for one decision. A decision that takes longer is
  /// discarded, the previous command is held and the tick is flagged "overrun".
  void set_decision_budget(std::optional<double> seconds) { budget_ = seconds; }

  bool finished() const { return finished_; }
  const JointState &state() const { return state_; }
  const EpisodeTrace &trace() const { return trace_; }
  EpisodeTrace take_trace() { return std::move(trace_); }
  EpisodeTrace &mutable_trace() { return trace_; }
  ControllerKind kind() const { return controller_->kind(); }
  const ScenarioGeometry &geometry() const { return geometry_; }
  const ControllerParams &params() const { return params_; }
  std::uint64_t tick() const { return tick_; }

private:
  ControllerParams params_;
  ScenarioGeometry geometry_;
  SimConfig sim_;
  std::unique_ptr<Controller> controller_;
  JointState state_;
  double u_hold_{0.0};
  std::uint64_t tick_{0};
  std::optional<double> ped_passed_at_;
  std::optional<double> veh_passed_at_;
  bool finished_{false};
  std::optional<double> budget_;
  EpisodeTrace trace_;
};

EpisodeTrace run_episode(const ScenarioScript &script, ControllerKind controller, const ScenarioGeometry &geometry,
                         const ControllerParams &params, const SimConfig &sim, const SolverOptions &solver = {});

struct BatchJob
{
  ScenarioKind scenario{ScenarioKind::Crossing};
  ControllerKind controller{ControllerKind::Iampdm};
  std::uint64_t seed{0};

  bool operator<(const BatchJob &o) const;
  bool operator==(const BatchJob &o) const = default;
};

struct BatchSetup
{
  ScenarioGeometry geometry;
  ControllerParams params;
  SimConfig sim;
  ScriptParams scripts;
  SolverOptions solver;
};

/// Cartesian product in canonical order (scenario, controller, seed).
std::vector<BatchJob> make_grid(const std::vector<ScenarioKind> &scenarios,
                                const std::vector<ControllerKind> &controllers, const std::vector<std::uint64_t> &seeds);

EpisodeTrace run_job(const BatchJob &job, const BatchSetup &setup);

/// Runs the jobs on up to `threads` workers (0 = hardware concurrency). The
/// result is sorted canonically regardless of job order or scheduling. An
/// exception inside one episode is stored in that trace's `error` field.
std::vector<EpisodeTrace> run_batch(std::vector<BatchJob> jobs, const BatchSetup &setup, unsigned threads = 0);

}  // namespace pedsim

#endif  // PEDSIM_SIM_HPP_
