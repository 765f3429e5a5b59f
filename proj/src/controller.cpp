#include "pedsim/controller.hpp"

#include <algorithm>
#include <cctype>
#include <stdexcept>
#include <string>

#include "pedsim/baselines.hpp"

namespace pedsim {

std::string_view to_string(ControllerKind k)
{
  switch (k) {
    case ControllerKind::Iampdm: return "iampdm";
    case ControllerKind::Rbdm: return "rbdm";
    case ControllerKind::Nia: return "nia";
  }
  return "?";
}

ControllerKind controller_from_string(std::string_view s)
{
  std::string lower(s);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  if (lower == "iampdm") return ControllerKind::Iampdm;
  if (lower == "rbdm") return ControllerKind::Rbdm;
  if (lower == "nia") return ControllerKind::Nia;
  throw std::invalid_argument("controller: unknown controller '" + std::string(s) + "' (expected iampdm, rbdm or nia)");
}

namespace {

class IampdmAdapter final : public Controller
{
public:
  IampdmAdapter(const ControllerParams &p, const ScenarioGeometry &g, const SolverOptions &o) : impl_(p, g, o) {}

  ControllerKind kind() const override { return ControllerKind::Iampdm; }
  void reset() override { impl_.reset(); }
  double observe(const JointState &s, double raw) override { return impl_.observe(s, raw); }
  double decide(const JointState &s, double raw) override { return impl_.decide(s, raw); }

  ControllerDiagnostics diagnostics() const override
  {
    const auto &d = impl_.diagnostics();
    ControllerDiagnostics out;
    out.intention_effective = d.intention_effective;
    if (!d.used_mpc) {
      out.label = "tracking";
      return out;
    }
    out.label = d.status == SolveStatus::Infeasible ? "emergency" : "mpc";
    out.mpc = MpcDiagnostics{d.safety.w_safe, d.safety.d_min, d.cost, d.iterations, d.constraint_violation, d.status};
    return out;
  }

private:
  IampdmController impl_;
};

class RbdmAdapter final : public Controller
{
public:
  RbdmAdapter(const ControllerParams &p, const ScenarioGeometry &g) : impl_(p, g) {}

  ControllerKind kind() const override { return ControllerKind::Rbdm; }
  void reset() override
  {
    impl_.reset();
    intention_ = 0.0;
  }
  double observe(const JointState &, double raw) override
  {
    intention_ = std::clamp(raw, 0.0, 1.0);
    return intention_;
  }
  double decide(const JointState &s, double raw) override
  {
    observe(s, raw);
    return impl_.decide(s, intention_);
  }
  ControllerDiagnostics diagnostics() const override
  {
    return {std::string(to_string(impl_.last_rule())), intention_, std::nullopt};
  }

private:
  RbdmController impl_;
  double intention_{0.0};
};

// The intention argument is dropped here; NiaController has no way to receive it.
class NiaAdapter final : public Controller
{
public:
  NiaAdapter(const ControllerParams &p, const ScenarioGeometry &g) : impl_(p, g) {}

  ControllerKind kind() const override { return ControllerKind::Nia; }
  void reset() override { impl_.reset(); }
  double observe(const JointState &, double) override { return 0.0; }
  double decide(const JointState &s, double) override { return impl_.decide(s); }
  ControllerDiagnostics diagnostics() const override
  {
    return {std::string(to_string(impl_.state().mode)), 0.0, std::nullopt};
  }

private:
  NiaController impl_;
};

}  // namespace

std::unique_ptr<Controller> make_controller(ControllerKind kind, const ControllerParams &params,
                                            const ScenarioGeometry &geometry, const SolverOptions &solver)
{
  switch (kind) {
    case ControllerKind::Iampdm: return std::make_unique<IampdmAdapter>(params, geometry, solver);
    case ControllerKind::Rbdm: return std::make_unique<RbdmAdapter>(params, geometry);
    case ControllerKind::Nia: return std::make_unique<NiaAdapter>(params, geometry);
  }
  throw std::invalid_argument("controller: unsupported kind");
}

}  // namespace pedsim
