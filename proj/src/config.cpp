#include "pedsim/config.hpp"

#include <cstdio>
#include <fstream>
#include <set>

#include <openssl/evp.h>

namespace pedsim {

using nlohmann::json;

namespace {

// Reads one JSON object, remembering which keys were consumed.
class Section
{
public:
  Section(const json &j, std::string path) : j_(j), path_(std::move(path))
  {
    if (!j_.is_object()) {
      throw ConfigError(path_ + ": expected an object");
    }
  }

  std::string at(const std::string &key) const { return path_.empty() ? key : path_ + "." + key; }

  const json *find(const std::string &key)
  {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  void number(const std::string &key, double &out)
  {
    if (const json *v = find(key)) {
      if (!v->is_number()) throw ConfigError(at(key) + ": expected a number");
      out = v->get<double>();
    }
  }

  template<class Int>
  void integer(const std::string &key, Int &out)
  {
    if (const json *v = find(key)) {
      if (!v->is_number_integer()) throw ConfigError(at(key) + ": expected an integer");
      if (v->is_number_unsigned()) {
        out = static_cast<Int>(v->get<std::uint64_t>());
      } else {
        const auto x = v->get<std::int64_t>();
        if (x < 0 && std::is_unsigned_v<Int>) throw ConfigError(at(key) + ": must be nonnegative");
        out = static_cast<Int>(x);
      }
    }
  }

  void string(const std::string &key, std::string &out)
  {
    if (const json *v = find(key)) {
      if (!v->is_string()) throw ConfigError(at(key) + ": expected a string");
      out = v->get<std::string>();
    }
  }

  void interval(const std::string &key, Interval &out)
  {
    if (const json *v = find(key)) {
      if (!v->is_array() || v->size() != 2 || !(*v)[0].is_number() || !(*v)[1].is_number()) {
        throw ConfigError(at(key) + ": expected [lo, hi]");
      }
      out = {(*v)[0].get<double>(), (*v)[1].get<double>()};
    }
  }

  template<class T, class F>
  void list(const std::string &key, std::vector<T> &out, F &&convert)
  {
    if (const json *v = find(key)) {
      if (!v->is_array()) throw ConfigError(at(key) + ": expected an array");
      std::vector<T> tmp;
      for (std::size_t i = 0; i < v->size(); ++i) {
        try {
          tmp.push_back(convert((*v)[i]));
        } catch (const std::exception &e) {
          throw ConfigError(at(key) + "[" + std::to_string(i) + "]: " + e.what());
        }
      }
      out = std::move(tmp);
    }
  }

  template<class F>
  void enumeration(const std::string &key, F &&assign)
  {
    if (const json *v = find(key)) {
      if (!v->is_string()) throw ConfigError(at(key) + ": expected a string");
      try {
        assign(v->get<std::string>());
      } catch (const ConfigError &) {
        throw;
      } catch (const std::exception &e) {
        throw ConfigError(at(key) + ": " + e.what());
      }
    }
  }

  std::optional<Section> sub(const std::string &key)
  {
    if (const json *v = find(key)) {
      return Section(*v, at(key));
    }
    return std::nullopt;
  }

  void finish() const
  {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.contains(it.key())) {
        throw ConfigError(at(it.key()) + ": unknown key");
      }
    }
  }

private:
  const json &j_;
  std::string path_;
  std::set<std::string> seen_;
};

std::string name_of(const json &v)
{
  if (!v.is_string()) throw std::invalid_argument("expected a string");
  return v.get<std::string>();
}

std::uint64_t seed_of(const json &v)
{
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
    throw std::invalid_argument("expected a nonnegative integer");
  }
  return v.get<std::uint64_t>();
}

void read_geometry(Section s, ScenarioGeometry &g)
{
  s.number("conflict_x", g.conflict_x);
  s.number("conflict_y", g.conflict_y);
  s.number("x_ped_path", g.x_ped_path);
  s.number("y_veh_lane", g.y_veh_lane);
  s.interval("safe_zone", g.safe_zone);
  s.interval("near_zone", g.near_zone);
  s.interval("crossing_zone", g.crossing_zone);
  s.number("road_half_width", g.road_half_width);
  s.number("veh_clearance", g.veh_clearance);
  s.number("sensing_range", g.sensing_range);
  s.finish();
}

void read_params(Section s, ControllerParams &p)
{
  for (auto [key, slot] : std::initializer_list<std::pair<const char *, double *>>{
           {"w_safe", &p.w_safe},
           {"w_com", &p.w_com},
           {"w_ref_ped", &p.w_ref_ped},
           {"w_ref_veh", &p.w_ref_veh},
           {"d_min", &p.d_min},
           {"K_d", &p.K_d},
           {"v_veh_max", &p.v_veh_max},
           {"a_min", &p.a_min},
           {"a_max", &p.a_max},
           {"c", &p.c},
           {"v_ped_ref", &p.v_ped_ref},
           {"v_eps", &p.v_eps},
           {"dt", &p.dt},
           {"v_veh_ref", &p.v_veh_ref},
           {"k_p", &p.k_p},
           {"t_NIA", &p.t_NIA},
           {"ttc_threshold", &p.ttc_threshold},
           {"intention_threshold", &p.intention_threshold},
           {"slow_speed", &p.slow_speed},
           {"comfort_decel", &p.comfort_decel},
           {"stop_buffer", &p.stop_buffer},
           {"standstill_speed", &p.standstill_speed},
           {"eps_safe", &p.eps_safe}}) {
    s.number(key, *slot);
  }
  s.integer("N", p.N);
  s.enumeration("prediction_mode", [&](const std::string &v) {
    if (v == "rollout") p.prediction_mode = PredictionMode::Rollout;
    else if (v == "frozen_z") p.prediction_mode = PredictionMode::FrozenZ;
    else throw std::invalid_argument("expected 'rollout' or 'frozen_z'");
  });
  s.enumeration("ref_cost_form", [&](const std::string &v) {
    if (v == "deviation") p.ref_cost_form = RefCostForm::Deviation;
    else if (v == "literal") p.ref_cost_form = RefCostForm::Literal;
    else throw std::invalid_argument("expected 'deviation' or 'literal'");
  });
  s.finish();
}

void read_sim(Section s, SimConfig &c)
{
  s.number("dt_sim", c.dt_sim);
  s.integer("controller_every", c.controller_every);
  s.number("T_max", c.T_max);
  s.number("ped_lag", c.ped_lag);
  if (auto init = s.sub("initial")) {
    init->number("x_veh", c.initial.x_veh);
    init->number("v_veh", c.initial.v_veh);
    init->number("y_ped", c.initial.y_ped);
    init->number("v_ped", c.initial.v_ped);
    init->finish();
  }
  s.finish();
}

void read_scripts(Section s, ScriptParams &p)
{
  s.number("hesitation_point", p.hesitation_point);
  s.number("hesitation_sigma", p.hesitation_sigma);
  s.number("hesitation_duration", p.hesitation_duration);
  s.number("duration_sigma", p.duration_sigma);
  s.number("wait_point", p.wait_point);
  s.number("gap_acceptance", p.gap_acceptance);
  s.number("slow_vehicle_speed", p.slow_vehicle_speed);
  s.finish();
}

void read_solver(Section s, SolverOptions &o)
{
  s.number("fd_step", o.fd_step);
  s.integer("max_iters_per_stage", o.max_iters_per_stage);
  s.integer("stages", o.stages);
  s.number("feas_tol", o.feas_tol);
  s.number("clip_penalty", o.clip_penalty);
  s.integer("lattice_limit", o.lattice_limit);
  s.finish();
}

void read_batch(Section s, BatchConfig &b)
{
  s.list("scenarios", b.scenarios, [](const json &v) { return scenario_from_string(name_of(v)); });
  s.list("controllers", b.controllers, [](const json &v) { return controller_from_string(name_of(v)); });
  s.list("seeds", b.seeds, seed_of);
  s.integer("threads", b.threads);
  s.finish();
}

void read_tuning(Section s, TuningConfig &t)
{
  s.number("k1", t.k1);
  s.number("k2", t.k2);
  s.number("k3", t.k3);
  s.number("k4", t.k4);
  s.list("free_params", t.free_params, name_of);
  if (auto b = s.sub("theta_bounds")) {
    for (auto name : kThetaNames) {
      Interval iv{t.theta_bounds.at(std::string(name)).first, t.theta_bounds.at(std::string(name)).second};
      b->interval(std::string(name), iv);
      t.theta_bounds[std::string(name)] = {iv.lo, iv.hi};
    }
    b->finish();
  }
  s.integer("budget", t.budget);
  s.integer("population", t.population);
  s.integer("rng_seed", t.rng_seed);
  s.list("seeds", t.seeds, seed_of);
  s.list("scenarios", t.scenarios, [](const json &v) { return scenario_from_string(name_of(v)); });
  s.finish();
}

void read_serve(Section s, ServeConfig &c)
{
  s.string("bind", c.bind);
  s.integer("port", c.port);
  s.number("tick_rate", c.tick_rate);
  s.enumeration("controller", [&](const std::string &v) { c.controller = controller_from_string(v); });
  s.string("static_dir", c.static_dir);
  s.finish();
}

template<class F>
void rethrow_as_config_error(F &&f)
{
  try {
    f();
  } catch (const ConfigError &) {
    throw;
  } catch (const std::invalid_argument &e) {
    throw ConfigError(e.what());
  }
}

}  // namespace

void ExperimentConfig::validate() const
{
  rethrow_as_config_error([&] {
    geometry.validate();
    params.validate();
    sim.validate(params);
    tuning.validate();
    if (batch.scenarios.empty()) throw ConfigError("batch.scenarios: must not be empty");
    if (batch.controllers.empty()) throw ConfigError("batch.controllers: must not be empty");
    if (batch.seeds.empty()) throw ConfigError("batch.seeds: must not be empty");
    if (!(serve.tick_rate > 0.0)) throw ConfigError("serve.tick_rate: must be > 0");
    if (solver.fd_step <= 0.0) throw ConfigError("solver.fd_step: must be > 0");
    if (solver.stages < 1) throw ConfigError("solver.stages: must be >= 1");
    if (solver.max_iters_per_stage < 1) throw ConfigError("solver.max_iters_per_stage: must be >= 1");
  });
}

ExperimentConfig parse_config(const json &j)
{
  ExperimentConfig cfg;
  Section root(j, "");
  if (const json *schema = root.find("schema")) {
    if (!schema->is_string() || schema->get<std::string>() != kConfigSchema) {
      throw ConfigError(std::string("schema: expected \"") + kConfigSchema + "\"");
    }
  }
  if (auto s = root.sub("geometry")) read_geometry(*s, cfg.geometry);
  if (auto s = root.sub("params")) read_params(*s, cfg.params);
  if (auto s = root.sub("sim")) read_sim(*s, cfg.sim);
  if (auto s = root.sub("scripts")) read_scripts(*s, cfg.scripts);
  if (auto s = root.sub("solver")) read_solver(*s, cfg.solver);
  if (auto s = root.sub("batch")) read_batch(*s, cfg.batch);
  if (auto s = root.sub("tuning")) read_tuning(*s, cfg.tuning);
  if (auto s = root.sub("serve")) read_serve(*s, cfg.serve);
  root.finish();
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path &path)
{
  std::ifstream is(path);
  if (!is) {
    throw ConfigError("config: cannot open '" + path.string() + "'");
  }
  json j;
  try {
    j = json::parse(is);
  } catch (const json::parse_error &e) {
    throw ConfigError("config: parse error in '" + path.string() + "': " + e.what());
  }
  return parse_config(j);
}

json to_json(const ExperimentConfig &c)
{
  const auto &g = c.geometry;
  const auto &p = c.params;
  json names_s = json::array(), names_c = json::array(), tune_s = json::array();
  for (auto s : c.batch.scenarios) names_s.push_back(std::string(to_string(s)));
  for (auto k : c.batch.controllers) names_c.push_back(std::string(to_string(k)));
  for (auto s : c.tuning.scenarios) tune_s.push_back(std::string(to_string(s)));
  json bounds = json::object();
  for (const auto &[name, b] : c.tuning.theta_bounds) bounds[name] = {b.first, b.second};

  return json{
      {"schema", kConfigSchema},
      {"geometry",
       {{"conflict_x", g.conflict_x},
        {"conflict_y", g.conflict_y},
        {"x_ped_path", g.x_ped_path},
        {"y_veh_lane", g.y_veh_lane},
        {"safe_zone", {g.safe_zone.lo, g.safe_zone.hi}},
        {"near_zone", {g.near_zone.lo, g.near_zone.hi}},
        {"crossing_zone", {g.crossing_zone.lo, g.crossing_zone.hi}},
        {"road_half_width", g.road_half_width},
        {"veh_clearance", g.veh_clearance},
        {"sensing_range", g.sensing_range}}},
      {"params",
       {{"w_safe", p.w_safe},
        {"w_com", p.w_com},
        {"w_ref_ped", p.w_ref_ped},
        {"w_ref_veh", p.w_ref_veh},
        {"d_min", p.d_min},
        {"K_d", p.K_d},
        {"v_veh_max", p.v_veh_max},
        {"a_min", p.a_min},
        {"a_max", p.a_max},
        {"c", p.c},
        {"v_ped_ref", p.v_ped_ref},
        {"v_eps", p.v_eps},
        {"N", p.N},
        {"dt", p.dt},
        {"v_veh_ref", p.v_veh_ref},
        {"k_p", p.k_p},
        {"t_NIA", p.t_NIA},
        {"ttc_threshold", p.ttc_threshold},
        {"intention_threshold", p.intention_threshold},
        {"slow_speed", p.slow_speed},
        {"comfort_decel", p.comfort_decel},
        {"stop_buffer", p.stop_buffer},
        {"standstill_speed", p.standstill_speed},
        {"eps_safe", p.eps_safe},
        {"prediction_mode", std::string(to_string(p.prediction_mode))},
        {"ref_cost_form", std::string(to_string(p.ref_cost_form))}}},
      {"sim",
       {{"dt_sim", c.sim.dt_sim},
        {"controller_every", c.sim.controller_every},
        {"T_max", c.sim.T_max},
        {"ped_lag", c.sim.ped_lag},
        {"initial",
         {{"x_veh", c.sim.initial.x_veh},
          {"v_veh", c.sim.initial.v_veh},
          {"y_ped", c.sim.initial.y_ped},
          {"v_ped", c.sim.initial.v_ped}}}}},
      {"scripts",
       {{"hesitation_point", c.scripts.hesitation_point},
        {"hesitation_sigma", c.scripts.hesitation_sigma},
        {"hesitation_duration", c.scripts.hesitation_duration},
        {"duration_sigma", c.scripts.duration_sigma},
        {"wait_point", c.scripts.wait_point},
        {"gap_acceptance", c.scripts.gap_acceptance},
        {"slow_vehicle_speed", c.scripts.slow_vehicle_speed}}},
      {"solver",
       {{"fd_step", c.solver.fd_step},
        {"max_iters_per_stage", c.solver.max_iters_per_stage},
        {"stages", c.solver.stages},
        {"feas_tol", c.solver.feas_tol},
        {"clip_penalty", c.solver.clip_penalty},
        {"lattice_limit", c.solver.lattice_limit}}},
      {"batch", {{"scenarios", names_s}, {"controllers", names_c}, {"seeds", c.batch.seeds}, {"threads", c.batch.threads}}},
      {"tuning",
       {{"k1", c.tuning.k1},
        {"k2", c.tuning.k2},
        {"k3", c.tuning.k3},
        {"k4", c.tuning.k4},
        {"free_params", c.tuning.free_params},
        {"theta_bounds", bounds},
        {"budget", c.tuning.budget},
        {"population", c.tuning.population},
        {"rng_seed", c.tuning.rng_seed},
        {"seeds", c.tuning.seeds},
        {"scenarios", tune_s}}},
      {"serve",
       {{"bind", c.serve.bind},
        {"port", c.serve.port},
        {"tick_rate", c.serve.tick_rate},
        {"controller", std::string(to_string(c.serve.controller))},
        {"static_dir", c.serve.static_dir}}},
  };
}

std::string sha256_hex(const std::string &data)
{
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("sha256: digest failed");
  }
  std::string hex;
  hex.reserve(2 * len);
  char buf[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(buf, sizeof buf, "%02x", digest[i]);
    hex += buf;
  }
  return hex;
}

std::string config_hash(const ExperimentConfig &cfg)
{
  // The bind address, port and static directory describe where a server runs,
  // not what it computes; they stay out of the hash.
  json j = to_json(cfg);
  j["serve"].erase("bind");
  j["serve"].erase("port");
  j["serve"].erase("static_dir");
  j["batch"].erase("threads");
  return sha256_hex(j.dump()).substr(0, 16);
}

}  // namespace pedsim
