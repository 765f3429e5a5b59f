#ifndef PEDSIM_SESSION_HPP_
#define PEDSIM_SESSION_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "pedsim/config.hpp"
#include "pedsim/sim.hpp"

namespace pedsim {

inline constexpr const char *kProtocolSchema = "pedsim.session/1";

// Pedestrian input ranges accepted without clamping.
inline constexpr double kTargetSpeedMin = -0.5;
inline constexpr double kTargetSpeedMax = 2.0;

enum class ClockMode { Wall, Logical };

struct JoinSession
{
  ControllerKind controller{ControllerKind::Iampdm};
  ClockMode clock{ClockMode::Wall};
};
struct PedInput
{
  double target_speed{0.0};
  double intention{0.0};
};
struct ResetEpisode
{
};
struct SelectController
{
  ControllerKind controller{ControllerKind::Iampdm};
};
/// Logical-clock mode only: advance the plant by this many ticks.
struct Advance
{
  int ticks{1};
};

using ClientMessage = std::variant<JoinSession, PedInput, ResetEpisode, SelectController, Advance>;

/// Malformed or out-of-protocol client message.
class ProtocolError : public std::runtime_error
{
public:
  ProtocolError(std::string code, const std::string &message) : std::runtime_error(message), code_(std::move(code)) {}
  const std::string &code() const { return code_; }

private:
  std::string code_;
};

ClientMessage parse_client_message(const std::string &text);
std::string encode(const ClientMessage &msg);

nlohmann::json make_error(const std::string &code, const std::string &message);

/// Transport-independent session state machine. Exactly one thread may call
/// into a Session; network code feeds it messages and forwards what it returns.
class Session
{
public:
  Session(ExperimentConfig cfg, ControllerKind controller, std::string id = "local");

  /// Applies one client message and returns the server messages it produces.
  /// Never throws on bad input; protocol problems come back as Error messages.
  std::vector<nlohmann::json> handle(const ClientMessage &msg);
  std::vector<nlohmann::json> handle_text(const std::string &text);

  /// Advances the plant one tick with the latest pedestrian input. Returns the
  /// Tick message, followed by EpisodeEnd on the final tick. Empty once the
  /// episode has ended.
  std::vector<nlohmann::json> tick();

  bool joined() const { return joined_; }
  ClockMode clock() const { return clock_; }
  bool finished() const { return runner_.finished(); }
  ControllerKind controller() const { return runner_.kind(); }
  const EpisodeTrace &trace() const { return runner_.trace(); }
  const std::string &id() const { return id_; }
  const ExperimentConfig &config() const { return cfg_; }

private:
  void restart(ControllerKind kind);
  nlohmann::json episode_end() const;

  ExperimentConfig cfg_;
  std::string id_;
  EpisodeRunner runner_;
  std::optional<ControllerKind> pending_;
  PedInput input_;
  std::vector<std::string> pending_flags_;
  std::uint64_t seq_{0};
  bool joined_{false};
  ClockMode clock_{ClockMode::Wall};
};

/// Builds an EpisodeTrace from the Tick messages of a session and its EpisodeEnd.
EpisodeTrace trace_from_messages(const std::vector<nlohmann::json> &ticks, const nlohmann::json &episode_end);

struct TimedInput
{
  std::uint64_t tick{0};  // sent just before this tick is advanced
  PedInput input;
};

/// Drives an in-process Session through the wire encoding with a logical
/// clock. Inputs are applied in order of their tick.
EpisodeTrace replay_session(const ExperimentConfig &cfg, ControllerKind controller, std::vector<TimedInput> script);

}  // namespace pedsim

#endif  // PEDSIM_SESSION_HPP_
