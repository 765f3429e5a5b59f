#ifndef PEDSIM_TUNING_HPP_
#define PEDSIM_TUNING_HPP_

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "pedsim/sim.hpp"

namespace pedsim {

/// Names of the tunable parameter vector, in order.
inline constexpr std::array<std::string_view, 9> kThetaNames{
    "w_safe", "w_com", "w_ref_ped", "w_ref_veh", "d_min", "K_d", "v_veh_max", "a_min", "a_max"};

double get_theta(const ControllerParams &p, std::string_view name);
void set_theta(ControllerParams &p, std::string_view name, double value);

struct TuningConfig
{
  double k1{1.0};   // elapsed time
  double k2{0.1};   // squared commanded acceleration
  double k3{0.5};   // reward on the minimum separation
  double k4{1.0};   // inverse pedestrian-model TTC
  std::vector<std::string> free_params{"w_safe", "w_com", "d_min", "K_d"};
  std::map<std::string, std::pair<double, double>> theta_bounds{
      {"w_safe", {10.0, 2000.0}}, {"w_com", {0.05, 20.0}},   {"w_ref_ped", {0.0, 20.0}},
      {"w_ref_veh", {0.05, 20.0}}, {"d_min", {1.0, 8.0}},    {"K_d", {0.1, 5.0}},
      {"v_veh_max", {8.5, 16.0}},  {"a_min", {-8.0, -1.0}},  {"a_max", {0.5, 4.0}}};
  int budget{40};
  std::size_t population{6};
  std::uint64_t rng_seed{7};
  std::vector<std::uint64_t> seeds{1, 2, 3};
  std::vector<ScenarioKind> scenarios{ScenarioKind::Crossing, ScenarioKind::Remaining,
                                      ScenarioKind::DelayedCrossing, ScenarioKind::DelayedRemaining};

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
};

/// Global episode cost: trapezoidal integral over [t0, T_end] of
/// k1 (t - t0) + k2 u_cmd^2 + k4 / TTC_model, minus k3 times the minimum
/// separation from the conflict point over the episode. The inverse TTC is 0
/// when TTC <= 0 and capped at 1 / kappa.
double j_glob(const EpisodeTrace &trace, const TuningConfig &cfg, const ScenarioGeometry &geometry,
              const ControllerParams &params);

/// The integral part of j_glob alone (no separation term).
double j_glob_integral(const EpisodeTrace &trace, const TuningConfig &cfg, const ScenarioGeometry &geometry,
                       const ControllerParams &params);

struct TuneEvaluation
{
  std::vector<double> x;
  double value{0.0};
};

struct TuneResult
{
  std::vector<double> best;
  double best_value{0.0};
  std::vector<TuneEvaluation> log;  // every evaluation, in order
  std::vector<double> best_so_far;  // running minimum after each evaluation
};

using Objective = std::function<double(const std::vector<double> &)>;

/// Seeded random population followed by Nelder-Mead restarts, with every
/// trial point clamped into [lo, hi]. The first evaluation is x0, so the result
/// is never worse than x0. Deterministic given the inputs.
TuneResult minimize_bounded(const Objective &f, std::vector<double> x0, const std::vector<double> &lo,
                            const std::vector<double> &hi, int budget, std::size_t population, std::uint64_t seed);

/// Mean j_glob of IAMPDM over cfg.scenarios x cfg.seeds for the free θ entries.
Objective make_batch_objective(const BatchSetup &base, const TuningConfig &cfg, unsigned threads = 0);

/// Tunes cfg.free_params starting from base.params.
TuneResult tune(const BatchSetup &base, const TuningConfig &cfg, unsigned threads = 0);

/// Applies a tuning result to a parameter set.
ControllerParams apply_theta(ControllerParams p, const TuningConfig &cfg, const std::vector<double> &x);

struct ExpertStep
{
  TuningConfig config;
  TuneResult result;
  nlohmann::json report;  // previous and new k_i / θ* side by side
  std::string text;
};

/// Records new k_i chosen by the expert, re-runs tune and reports both
/// configurations next to each other.
ExpertStep expert_loop_step(const BatchSetup &base, const TuningConfig &previous, const TuneResult &previous_result,
                            const std::array<double, 4> &k_values, unsigned threads = 0);

}  // namespace pedsim

#endif  // PEDSIM_TUNING_HPP_
