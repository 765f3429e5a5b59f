#include "pedsim/trace_io.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace pedsim {

using nlohmann::json;

namespace {

SolveStatus status_from_string(const std::string &s)
{
  if (s == "optimal") return SolveStatus::Optimal;
  if (s == "max_iters") return SolveStatus::MaxIters;
  if (s == "infeasible") return SolveStatus::Infeasible;
  throw std::runtime_error("trace: unknown solver status '" + s + "'");
}

}  // namespace

json to_json(const ControllerDiagnostics &d)
{
  json j{{"label", d.label}, {"intention_effective", d.intention_effective}};
  if (d.mpc) {
    const auto &m = *d.mpc;
    j["mpc"] = {{"w_safe_eff", m.w_safe_eff},
                {"d_min_eff", m.d_min_eff},
                {"cost_total", m.cost.total},
                {"cost_com", m.cost.com},
                {"cost_ref", m.cost.ref},
                {"cost_safe", m.cost.safe},
                {"iterations", m.iterations},
                {"constraint_violation", m.constraint_violation},
                {"status", std::string(to_string(m.status))}};
  }
  return j;
}

ControllerDiagnostics diagnostics_from_json(const json &j)
{
  ControllerDiagnostics d;
  d.label = j.at("label").get<std::string>();
  d.intention_effective = j.at("intention_effective").get<double>();
  if (j.contains("mpc")) {
    const auto &m = j.at("mpc");
    MpcDiagnostics md;
    md.w_safe_eff = m.at("w_safe_eff").get<double>();
    md.d_min_eff = m.at("d_min_eff").get<double>();
    md.cost.total = m.at("cost_total").get<double>();
    md.cost.com = m.at("cost_com").get<double>();
    md.cost.ref = m.at("cost_ref").get<double>();
    md.cost.safe = m.at("cost_safe").get<double>();
    md.iterations = m.at("iterations").get<int>();
    md.constraint_violation = m.at("constraint_violation").get<double>();
    md.status = status_from_string(m.at("status").get<std::string>());
    d.mpc = md;
  }
  return d;
}

json to_json(const TraceRecord &r)
{
  return json{{"t", r.state.t},
              {"x_veh", r.state.x_veh},
              {"v_veh", r.state.v_veh},
              {"y_ped", r.state.y_ped},
              {"v_ped", r.state.v_ped},
              {"u", r.u_cmd},
              {"ped_target", r.ped_target},
              {"intention_raw", r.intention_raw},
              {"intention_eff", r.intention_eff},
              {"zone", std::string(to_string(r.zone))},
              {"controller_tick", r.controller_tick},
              {"diag", to_json(r.diag)},
              {"flags", r.flags}};
}

TraceRecord record_from_json(const json &j)
{
  TraceRecord r;
  r.state.t = j.at("t").get<double>();
  r.state.x_veh = j.at("x_veh").get<double>();
  r.state.v_veh = j.at("v_veh").get<double>();
  r.state.y_ped = j.at("y_ped").get<double>();
  r.state.v_ped = j.at("v_ped").get<double>();
  r.u_cmd = j.at("u").get<double>();
  r.ped_target = j.at("ped_target").get<double>();
  r.intention_raw = j.at("intention_raw").get<double>();
  r.intention_eff = j.at("intention_eff").get<double>();
  r.zone = zone_from_string(j.at("zone").get<std::string>());
  r.controller_tick = j.at("controller_tick").get<bool>();
  r.diag = diagnostics_from_json(j.at("diag"));
  r.flags = j.at("flags").get<std::vector<std::string>>();
  return r;
}

void write_trace(std::ostream &os, const EpisodeTrace &trace, const std::string &config_hash)
{
  json header{{"type", "header"},           {"schema", kTraceSchema},           {"config_hash", config_hash},
              {"seed", trace.seed},          {"scenario", trace.scenario},       {"controller", trace.controller},
              {"dt_sim", trace.dt_sim}};
  os << header.dump() << '\n';
  for (const auto &r : trace.records) {
    json line = to_json(r);
    line["type"] = "tick";
    os << line.dump() << '\n';
  }
  json footer{{"type", "footer"},
              {"T_end", trace.T_end},
              {"outcome", std::string(to_string(trace.outcome))},
              {"ticks", trace.records.size()}};
  if (!trace.error.empty()) {
    footer["error"] = trace.error;
  }
  os << footer.dump() << '\n';
}

void write_trace_file(const std::filesystem::path &path, const EpisodeTrace &trace, const std::string &config_hash)
{
  std::ofstream os(path, std::ios::binary);
  if (!os) {
    throw std::runtime_error("cannot open trace file for writing: " + path.string());
  }
  write_trace(os, trace, config_hash);
  if (!os) {
    throw std::runtime_error("failed writing trace file: " + path.string());
  }
}

LoadedTrace read_trace(std::istream &is)
{
  LoadedTrace out;
  std::string line;
  bool have_header = false, have_footer = false;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) {
      continue;
    }
    json j;
    try {
      j = json::parse(line);
      const auto type = j.at("type").get<std::string>();
      if (type == "header") {
        out.header.schema = j.at("schema").get<std::string>();
        if (out.header.schema != kTraceSchema) {
          throw std::runtime_error("unsupported trace schema '" + out.header.schema + "'");
        }
        out.header.config_hash = j.at("config_hash").get<std::string>();
        out.header.seed = j.at("seed").get<std::uint64_t>();
        out.header.scenario = j.at("scenario").get<std::string>();
        out.header.controller = j.at("controller").get<std::string>();
        out.header.dt_sim = j.at("dt_sim").get<double>();
        out.trace.seed = out.header.seed;
        out.trace.scenario = out.header.scenario;
        out.trace.controller = out.header.controller;
        out.trace.dt_sim = out.header.dt_sim;
        have_header = true;
      } else if (type == "tick") {
        out.trace.records.push_back(record_from_json(j));
      } else if (type == "footer") {
        out.trace.T_end = j.at("T_end").get<double>();
        out.trace.outcome = outcome_from_string(j.at("outcome").get<std::string>());
        out.trace.error = j.value("error", std::string{});
        have_footer = true;
      } else {
        throw std::runtime_error("unknown line type '" + type + "'");
      }
    } catch (const std::exception &e) {
      throw std::runtime_error("trace line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  if (!have_header || !have_footer) {
    throw std::runtime_error("trace: missing header or footer line");
  }
  return out;
}

LoadedTrace read_trace_file(const std::filesystem::path &path)
{
  std::ifstream is(path, std::ios::binary);
  if (!is) {
    throw std::runtime_error("cannot open trace file: " + path.string());
  }
  return read_trace(is);
}

}  // namespace pedsim
