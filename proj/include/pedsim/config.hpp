#ifndef PEDSIM_CONFIG_HPP_
#define PEDSIM_CONFIG_HPP_

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pedsim/sim.hpp"
#include "pedsim/tuning.hpp"

namespace pedsim {

inline constexpr const char *kConfigSchema = "pedsim.config/1";

/// Validation failure; what() starts with the dotted path of the offending field.
class ConfigError : public std::invalid_argument
{
public:
  using std::invalid_argument::invalid_argument;
};

struct BatchConfig
{
  std::vector<ScenarioKind> scenarios{ScenarioKind::Crossing, ScenarioKind::Remaining,
                                      ScenarioKind::DelayedCrossing, ScenarioKind::DelayedRemaining};
  std::vector<ControllerKind> controllers{ControllerKind::Iampdm, ControllerKind::Rbdm, ControllerKind::Nia};
  std::vector<std::uint64_t> seeds{1, 2, 3};
  unsigned threads{0};  // 0 = hardware concurrency
};

struct ServeConfig
{
  std::string bind{"127.0.0.1"};
  unsigned short port{8080};
  double tick_rate{20.0};  // [Hz]
  ControllerKind controller{ControllerKind::Iampdm};
  std::string static_dir{"web"};
};

struct ExperimentConfig
{
  ScenarioGeometry geometry;
  ControllerParams params;
  SimConfig sim;
  ScriptParams scripts;
  SolverOptions solver;
  BatchConfig batch;
  TuningConfig tuning;
  ServeConfig serve;

  BatchSetup setup() const { return {geometry, params, sim, scripts, solver}; }
  /// Cross-section checks; throws ConfigError.
  void validate() const;
};

/// Missing keys keep their defaults; unknown keys and type mismatches are errors.
ExperimentConfig parse_config(const nlohmann::json &j);
ExperimentConfig load_config(const std::filesystem::path &path);

/// Every field, with sorted keys: the canonical form that gets hashed.
nlohmann::json to_json(const ExperimentConfig &cfg);

/// First 16 hex digits of SHA-256 over the canonical JSON dump.
std::string config_hash(const ExperimentConfig &cfg);
std::string sha256_hex(const std::string &data);

}  // namespace pedsim

#endif  // PEDSIM_CONFIG_HPP_
