#include "pedsim/session.hpp"

#include <algorithm>
#include <cmath>

#include "pedsim/metrics.hpp"
#include "pedsim/report.hpp"
#include "pedsim/trace_io.hpp"

namespace pedsim {

using nlohmann::json;

namespace {

std::string_view to_string(ClockMode c) { return c == ClockMode::Wall ? "wall" : "logical"; }

double number_field(const json &j, const char *key)
{
  auto it = j.find(key);
  if (it == j.end() || !it->is_number()) {
    throw ProtocolError("bad_message", std::string("field '") + key + "' must be a number");
  }
  const double v = it->get<double>();
  if (!std::isfinite(v)) {
    throw ProtocolError("bad_message", std::string("field '") + key + "' must be finite");
  }
  return v;
}

ControllerKind controller_field(const json &j)
{
  auto it = j.find("controller");
  if (it == j.end() || !it->is_string()) {
    throw ProtocolError("bad_message", "field 'controller' must be a string");
  }
  try {
    return controller_from_string(it->get<std::string>());
  } catch (const std::invalid_argument &e) {
    throw ProtocolError("unknown_controller", e.what());
  }
}

SimConfig human_sim(SimConfig sim)
{
  // A human pedestrian starts standing; nothing moves until the first input.
  sim.initial.v_ped = 0.0;
  return sim;
}

}  // namespace

ClientMessage parse_client_message(const std::string &text)
{
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error &e) {
    throw ProtocolError("bad_json", e.what());
  }
  if (!j.is_object() || !j.contains("type") || !j["type"].is_string()) {
    throw ProtocolError("bad_message", "message must be an object with a string 'type'");
  }
  const auto type = j["type"].get<std::string>();
  if (type == "join") {
    if (j.contains("schema") && j["schema"] != kProtocolSchema) {
      throw ProtocolError("schema_mismatch", std::string("server speaks ") + kProtocolSchema);
    }
    JoinSession m;
    m.controller = j.contains("controller") ? controller_field(j) : ControllerKind::Iampdm;
    const auto clock = j.value("clock", std::string("wall"));
    if (clock == "wall") {
      m.clock = ClockMode::Wall;
    } else if (clock == "logical") {
      m.clock = ClockMode::Logical;
    } else {
      throw ProtocolError("bad_message", "field 'clock' must be 'wall' or 'logical'");
    }
    return m;
  }
  if (type == "ped_input") {
    return PedInput{number_field(j, "target_speed"), number_field(j, "intention")};
  }
  if (type == "reset") {
    return ResetEpisode{};
  }
  if (type == "select_controller") {
    return SelectController{controller_field(j)};
  }
  if (type == "advance") {
    const int n = j.contains("ticks") ? static_cast<int>(number_field(j, "ticks")) : 1;
    if (n < 1 || n > 100000) {
      throw ProtocolError("bad_message", "field 'ticks' must be in [1, 100000]");
    }
    return Advance{n};
  }
  throw ProtocolError("unknown_type", "unknown message type '" + type + "'");
}

std::string encode(const ClientMessage &msg)
{
  json j = std::visit(
      [](const auto &m) -> json {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, JoinSession>) {
          return {{"type", "join"},
                  {"schema", kProtocolSchema},
                  {"controller", std::string(pedsim::to_string(m.controller))},
                  {"clock", std::string(to_string(m.clock))}};
        } else if constexpr (std::is_same_v<T, PedInput>) {
          return {{"type", "ped_input"}, {"target_speed", m.target_speed}, {"intention", m.intention}};
        } else if constexpr (std::is_same_v<T, ResetEpisode>) {
          return {{"type", "reset"}};
        } else if constexpr (std::is_same_v<T, SelectController>) {
          return {{"type", "select_controller"}, {"controller", std::string(pedsim::to_string(m.controller))}};
        } else {
          return {{"type", "advance"}, {"ticks", m.ticks}};
        }
      },
      msg);
  return j.dump();
}

json make_error(const std::string &code, const std::string &message)
{
  return {{"type", "error"}, {"schema", kProtocolSchema}, {"code", code}, {"message", message}};
}

Session::Session(ExperimentConfig cfg, ControllerKind controller, std::string id)
    : cfg_(std::move(cfg)), id_(std::move(id)),
      runner_(controller, cfg_.params, cfg_.geometry, human_sim(cfg_.sim), cfg_.solver)
{
}

void Session::restart(ControllerKind kind)
{
  if (kind != runner_.kind()) {
    runner_ = EpisodeRunner(kind, cfg_.params, cfg_.geometry, human_sim(cfg_.sim), cfg_.solver);
  } else {
    runner_.reset();
  }
  if (clock_ == ClockMode::Wall) {
    runner_.set_decision_budget(1.0 / cfg_.serve.tick_rate);
  } else {
    runner_.set_decision_budget(std::nullopt);
  }
  input_ = {};
  pending_flags_.clear();
}

std::vector<json> Session::handle_text(const std::string &text)
{
  try {
    return handle(parse_client_message(text));
  } catch (const ProtocolError &e) {
    return {make_error(e.code(), e.what())};
  }
}

std::vector<json> Session::handle(const ClientMessage &msg)
{
  if (const auto *join = std::get_if<JoinSession>(&msg)) {
    joined_ = true;
    clock_ = join->clock;
    pending_.reset();
    restart(join->controller);
    return {};
  }
  if (!joined_) {
    return {make_error("not_joined", "send a join message first")};
  }
  if (const auto *in = std::get_if<PedInput>(&msg)) {
    PedInput c{std::clamp(in->target_speed, kTargetSpeedMin, kTargetSpeedMax), std::clamp(in->intention, 0.0, 1.0)};
    if (c.target_speed != in->target_speed || c.intention != in->intention) {
      pending_flags_.emplace_back("input_clamped");
    }
    input_ = c;
    return {};
  }
  if (std::holds_alternative<ResetEpisode>(msg)) {
    const ControllerKind next = pending_.value_or(runner_.kind());
    pending_.reset();
    restart(next);
    return {};
  }
  if (const auto *sel = std::get_if<SelectController>(&msg)) {
    pending_ = sel->controller;
    return {};
  }
  if (const auto *adv = std::get_if<Advance>(&msg)) {
    if (clock_ != ClockMode::Logical) {
      return {make_error("wrong_clock", "advance is only accepted with the logical clock")};
    }
    if (finished()) {
      return {make_error("episode_over", "the episode has ended; send reset")};
    }
    std::vector<json> out;
    for (int k = 0; k < adv->ticks && !finished(); ++k) {
      auto msgs = tick();
      std::move(msgs.begin(), msgs.end(), std::back_inserter(out));
    }
    return out;
  }
  return {make_error("unknown_type", "unsupported message")};
}

std::vector<json> Session::tick()
{
  if (finished()) {
    return {};
  }
  const PedCommand cmd{input_.target_speed, input_.intention};
  const TraceRecord &rec = runner_.step(cmd, false);
  std::vector<std::string> flags = rec.flags;
  flags.insert(flags.end(), pending_flags_.begin(), pending_flags_.end());
  pending_flags_.clear();

  std::vector<json> out;
  out.push_back({{"type", "tick"},
                 {"schema", kProtocolSchema},
                 {"session", id_},
                 {"seq", seq_++},
                 {"record", to_json(rec)},
                 {"live", {{"ttc", ttc_metric(rec.state, cfg_.geometry)}, {"dst", dst_metric(rec.state, cfg_.geometry)}}},
                 {"flags", flags}});
  if (finished()) {
    out.push_back(episode_end());
  }
  return out;
}

json Session::episode_end() const
{
  const auto &tr = runner_.trace();
  json msg{{"type", "episode_end"},
           {"schema", kProtocolSchema},
           {"session", id_},
           {"controller", tr.controller},
           {"dt_sim", tr.dt_sim},
           {"T_end", tr.T_end},
           {"outcome", std::string(pedsim::to_string(tr.outcome))},
           {"TTC_avg", nullptr},
           {"DST_avg", nullptr}};
  try {
    const auto avg = episode_averages(tr, cfg_.geometry);
    msg["TTC_avg"] = avg.ttc_avg;
    msg["DST_avg"] = avg.dst_avg;
  } catch (const std::invalid_argument &) {
    // zero-length episode: averages stay null
  }
  return msg;
}

EpisodeTrace trace_from_messages(const std::vector<json> &ticks, const json &episode_end)
{
  EpisodeTrace tr;
  tr.scenario = "human";
  tr.controller = episode_end.at("controller").get<std::string>();
  tr.dt_sim = episode_end.at("dt_sim").get<double>();
  tr.T_end = episode_end.at("T_end").get<double>();
  tr.outcome = outcome_from_string(episode_end.at("outcome").get<std::string>());
  tr.records.reserve(ticks.size());
  for (const auto &t : ticks) {
    tr.records.push_back(record_from_json(t.at("record")));
  }
  return tr;
}

EpisodeTrace replay_session(const ExperimentConfig &cfg, ControllerKind controller, std::vector<TimedInput> script)
{
  std::stable_sort(script.begin(), script.end(), [](const auto &a, const auto &b) { return a.tick < b.tick; });
  Session session(cfg, controller);
  session.handle_text(encode(JoinSession{controller, ClockMode::Logical}));

  std::vector<json> ticks;
  json end;
  std::size_t next = 0;
  for (std::uint64_t k = 0; end.is_null(); ++k) {
    for (; next < script.size() && script[next].tick <= k; ++next) {
      session.handle_text(encode(script[next].input));
    }
    for (auto &m : session.handle_text(encode(Advance{1}))) {
      // Round-trip through text like a remote client would see it.
      json parsed = json::parse(m.dump());
      const auto type = parsed.at("type").get<std::string>();
      if (type == "tick") {
        ticks.push_back(std::move(parsed));
      } else if (type == "episode_end") {
        end = std::move(parsed);
      } else {
        throw std::runtime_error("replay_session: " + parsed.dump());
      }
    }
  }
  return trace_from_messages(ticks, end);
}

}  // namespace pedsim
