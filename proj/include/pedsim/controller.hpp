#ifndef PEDSIM_CONTROLLER_HPP_
#define PEDSIM_CONTROLLER_HPP_

#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include "pedsim/iampdm.hpp"

namespace pedsim {

enum class ControllerKind { Iampdm, Rbdm, Nia };

std::string_view to_string(ControllerKind k);
/// Accepts "iampdm", "rbdm", "nia" (case-insensitive). Throws std::invalid_argument.
ControllerKind controller_from_string(std::string_view s);

struct MpcDiagnostics
{
  double w_safe_eff{0.0};
  double d_min_eff{0.0};
  CostBreakdown cost;
  int iterations{0};
  double constraint_violation{0.0};
  SolveStatus status{SolveStatus::Optimal};
};

/// What the controller did on its last decision.
struct ControllerDiagnostics
{
  std::string label;                 // mode, rule, or "mpc"/"tracking"/"emergency"
  double intention_effective{0.0};
  std::optional<MpcDiagnostics> mpc;
};

/// Common driver-side interface. observe() runs every plant tick so time-based
/// bookkeeping stays at plant resolution; decide() runs at the controller cadence.
class Controller
{
public:
  virtual ~Controller() = default;

  virtual ControllerKind kind() const = 0;
  virtual void reset() = 0;
  virtual double observe(const JointState &state, double intention_raw) = 0;
  virtual double decide(const JointState &state, double intention_raw) = 0;
  virtual ControllerDiagnostics diagnostics() const = 0;
};

std::unique_ptr<Controller> make_controller(ControllerKind kind, const ControllerParams &params,
                                            const ScenarioGeometry &geometry, const SolverOptions &solver = {});

}  // namespace pedsim

#endif  // PEDSIM_CONTROLLER_HPP_
