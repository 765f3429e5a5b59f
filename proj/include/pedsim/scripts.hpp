#ifndef PEDSIM_SCRIPTS_HPP_
#define PEDSIM_SCRIPTS_HPP_

#include <array>
#include <cstdint>
#include <random>
#include <string_view>

#include "pedsim/scenario.hpp"

namespace pedsim {

enum class ScenarioKind { Crossing, Remaining, DelayedCrossing, DelayedRemaining };
std::string_view to_string(ScenarioKind k);
/// Accepts "crossing", "remaining", "delayed_crossing", "delayed_remaining". Throws std::invalid_argument.
ScenarioKind scenario_from_string(std::string_view s);

enum class PedPhase { Approach, Hesitate, Commit, Yield, Done };
std::string_view to_string(PedPhase p);

/// Intention signaled in each phase (index = PedPhase).
using IntentionProfile = std::array<double, 5>;

/// Tunable knobs of the scripted pedestrians; one set shared by all four kinds.
struct ScriptParams
{
  double hesitation_point{-3.0};    // mean stop position of the delayed scripts [m]
  double hesitation_sigma{0.3};     // [m]
  double hesitation_duration{3.0};  // [s]
  double duration_sigma{1.0};       // [s]
  double wait_point{-2.2};          // where the Remaining script stops [m]
  double gap_acceptance{3.0};       // minimum vehicle time-to-arrival accepted at the curb [s]
  double slow_vehicle_speed{0.5};   // vehicles below this speed are always accepted [m/s]
};

struct ScenarioScript
{
  ScenarioKind kind{ScenarioKind::Crossing};
  double hesitation_point{-3.0};
  double hesitation_duration{3.0};
  double wait_point{-2.2};
  double gap_acceptance{3.0};
  double slow_vehicle_speed{0.5};
  IntentionProfile intention_profile{};
  std::uint64_t rng_seed{0};
};

/// Default intention per phase for a scenario kind.
IntentionProfile default_intention_profile(ScenarioKind kind);

/// Draws the jittered hesitation point and duration from the seed. The point is
/// clamped into the safe/near bands and the duration to be nonnegative.
ScenarioScript make_script(ScenarioKind kind, const ScriptParams &params, std::uint64_t seed,
                           const ScenarioGeometry &geometry);

struct PedCommand
{
  double target_speed{0.0};  // [m/s]
  double intention{0.0};     // [0, 1]
};

struct PedPolicyState
{
  PedPhase phase{PedPhase::Approach};
  double phase_clock{0.0};
};

/// Phase machine of a scripted pedestrian. Deterministic given the script.
class ScriptedPedestrian
{
public:
  ScriptedPedestrian(ScenarioScript script, ScenarioGeometry geometry, double v_walk);

  void reset() { state_ = {}; }
  /// Advances the phase machine on the current state and returns the command
  /// for the next interval of length dt.
  PedCommand step(const JointState &state, double dt);

  const PedPolicyState &state() const { return state_; }
  const ScenarioScript &script() const { return script_; }
  /// True once the script no longer needs to cross before the episode may end.
  bool released() const { return state_.phase == PedPhase::Done; }

private:
  void enter(PedPhase p);
  double intention() const { return script_.intention_profile[static_cast<std::size_t>(state_.phase)]; }
  double approach_speed(double y, double stop_at) const;
  bool gap_ok(const JointState &s) const;

  ScenarioScript script_;
  ScenarioGeometry geometry_;
  double v_walk_;
  PedPolicyState state_;
};

}  // namespace pedsim

#endif  // PEDSIM_SCRIPTS_HPP_
