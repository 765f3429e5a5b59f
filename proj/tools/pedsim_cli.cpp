// pedsim command line: run, batch, stats, tune, serve, config.
//
// Exit codes: 0 success, 2 invalid input (config, flags, names), 3 runtime
// failure (I/O, missing traces, failed episodes).

#include <csignal>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "pedsim/config.hpp"
#include "pedsim/report.hpp"
#include "pedsim/trace_io.hpp"
#include "pedsim/tuning.hpp"
#include "pedsim/ws_server.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace pedsim;

namespace {

constexpr const char *kManifestSchema = "pedsim.manifest/1";
constexpr const char *kReportSchema = "pedsim.report/1";
constexpr const char *kThetaSchema = "pedsim.theta/1";
constexpr const char *kTuneLogSchema = "pedsim.tunelog/1";

constexpr int kExitValidation = 2;
constexpr int kExitRuntime = 3;

/// Input problems: bad names, unreadable theta files, mixed hashes.
struct UsageError : std::invalid_argument
{
  using std::invalid_argument::invalid_argument;
};

ExperimentConfig config_or_default(const std::string &path)
{
  if (path.empty()) {
    ExperimentConfig cfg;
    cfg.validate();
    return cfg;
  }
  return load_config(path);
}

json read_json_file(const fs::path &path)
{
  std::ifstream is(path);
  if (!is) {
    throw std::runtime_error("cannot open '" + path.string() + "'");
  }
  try {
    return json::parse(is);
  } catch (const json::parse_error &e) {
    throw std::runtime_error("parse error in '" + path.string() + "': " + e.what());
  }
}

void write_text(const fs::path &path, const std::string &text)
{
  if (path.has_parent_path()) {
    fs::create_directories(path.parent_path());
  }
  std::ofstream os(path, std::ios::binary);
  os << text;
  if (!os) {
    throw std::runtime_error("cannot write '" + path.string() + "'");
  }
}

void write_json(const fs::path &path, const json &j) { write_text(path, j.dump(2) + "\n"); }

void apply_theta_file(ExperimentConfig &cfg, const std::string &path)
{
  json j;
  try {
    j = read_json_file(path);
  } catch (const std::runtime_error &e) {
    throw UsageError(std::string("--theta: ") + e.what());
  }
  if (j.value("schema", std::string()) != kThetaSchema || !j.contains("theta") || !j["theta"].is_object()) {
    throw UsageError(std::string("--theta: expected an object with schema \"") + kThetaSchema + "\" and a theta map");
  }
  for (const auto &[name, value] : j["theta"].items()) {
    if (!value.is_number()) {
      throw UsageError("--theta: theta." + name + " must be a number");
    }
    try {
      set_theta(cfg.params, name, value.get<double>());
    } catch (const std::invalid_argument &e) {
      throw UsageError(std::string("--theta: ") + e.what());
    }
  }
  cfg.validate();
}

std::string trace_name(const std::string &scenario, const std::string &controller, std::uint64_t seed)
{
  return scenario + "__" + controller + "__" + std::to_string(seed) + ".jsonl";
}

// ---------------------------------------------------------------------------
// run

struct RunArgs
{
  std::string config;
  std::string scenario{"crossing"};
  std::string controller{"iampdm"};
  std::uint64_t seed{1};
  std::string out;
  std::string theta;
};

int cmd_run(const RunArgs &a)
{
  ExperimentConfig cfg = config_or_default(a.config);
  if (!a.theta.empty()) {
    apply_theta_file(cfg, a.theta);
  }
  const ScenarioKind scenario = scenario_from_string(a.scenario);
  const ControllerKind controller = controller_from_string(a.controller);

  const EpisodeTrace trace = run_job({scenario, controller, a.seed}, cfg.setup());
  const fs::path out = a.out.empty() ? fs::path(trace_name(a.scenario, a.controller, a.seed)) : fs::path(a.out);
  if (out.has_parent_path()) {
    fs::create_directories(out.parent_path());
  }
  write_trace_file(out, trace, config_hash(cfg));
  std::cout << out.string() << '\n';
  std::cerr << "outcome " << to_string(trace.outcome) << ", T_end " << trace.T_end << " s\n";
  return 0;
}

// ---------------------------------------------------------------------------
// batch

struct BatchArgs
{
  std::string config;
  std::string out{"batch_out"};
  std::optional<unsigned> threads;
};

int cmd_batch(const BatchArgs &a)
{
  const ExperimentConfig cfg = config_or_default(a.config);
  const std::string hash = config_hash(cfg);
  const fs::path dir(a.out);
  fs::create_directories(dir / "traces");

  const auto jobs = make_grid(cfg.batch.scenarios, cfg.batch.controllers, cfg.batch.seeds);
  const auto traces = run_batch(jobs, cfg.setup(), a.threads.value_or(cfg.batch.threads));

  json entries = json::array();
  std::size_t failed = 0;
  for (const auto &t : traces) {
    json e{{"scenario", t.scenario}, {"controller", t.controller}, {"seed", t.seed}};
    if (!t.error.empty()) {
      ++failed;
      e["error"] = t.error;
      std::cerr << "episode " << t.scenario << '/' << t.controller << '/' << t.seed << " failed: " << t.error << '\n';
    } else {
      const std::string rel = "traces/" + trace_name(t.scenario, t.controller, t.seed);
      write_trace_file(dir / rel, t, hash);
      e["file"] = rel;
      e["outcome"] = std::string(to_string(t.outcome));
      e["T_end"] = t.T_end;
    }
    entries.push_back(std::move(e));
  }

  json names_s = json::array(), names_c = json::array();
  for (auto s : cfg.batch.scenarios) names_s.push_back(std::string(to_string(s)));
  for (auto c : cfg.batch.controllers) names_c.push_back(std::string(to_string(c)));
  const json manifest{{"schema", kManifestSchema},
                      {"config_hash", hash},
                      {"seeds", cfg.batch.seeds},
                      {"scenarios", names_s},
                      {"controllers", names_c},
                      {"layout", "traces/<scenario>__<controller>__<seed>.jsonl"},
                      {"episodes", entries},
                      {"config", to_json(cfg)}};
  write_json(dir / "manifest.json", manifest);
  std::cout << (dir / "manifest.json").string() << '\n';
  std::cerr << traces.size() << " episodes, " << failed << " failed\n";
  return failed == 0 ? 0 : kExitRuntime;
}

// ---------------------------------------------------------------------------
// stats

struct StatsArgs
{
  std::vector<std::string> manifests;
  std::string out;
  bool force{false};
};

int cmd_stats(const StatsArgs &a)
{
  std::vector<EpisodeMetrics> episodes;
  std::vector<std::string> missing;
  std::set<std::string> hashes;
  std::optional<ExperimentConfig> cfg;

  for (const auto &mpath : a.manifests) {
    const json m = read_json_file(mpath);
    if (m.value("schema", std::string()) != kManifestSchema) {
      throw UsageError(mpath + ": schema: expected \"" + kManifestSchema + "\"");
    }
    const std::string hash = m.at("config_hash").get<std::string>();
    hashes.insert(hash);
    if (!cfg) {
      cfg = parse_config(m.at("config"));
    }
    const fs::path base = fs::path(mpath).parent_path();
    for (const auto &e : m.at("episodes")) {
      if (!e.contains("file")) {
        missing.push_back(e.at("scenario").get<std::string>() + "/" + e.at("controller").get<std::string>() + "/" +
                          std::to_string(e.at("seed").get<std::uint64_t>()) + " (episode failed)");
        continue;
      }
      const fs::path p = base / e.at("file").get<std::string>();
      if (!fs::exists(p)) {
        missing.push_back(p.string());
        continue;
      }
      const LoadedTrace lt = read_trace_file(p);
      hashes.insert(lt.header.config_hash);
      EpisodeMetrics em;
      em.scenario = lt.trace.scenario;
      em.controller = lt.trace.controller;
      em.seed = lt.trace.seed;
      em.outcome = lt.trace.outcome;
      em.avg = episode_averages(lt.trace, cfg->geometry);
      episodes.push_back(std::move(em));
    }
  }
  if (!missing.empty()) {
    std::cerr << "stats: " << missing.size() << " trace(s) missing:\n";
    for (const auto &m : missing) {
      std::cerr << "  " << m << '\n';
    }
    return kExitRuntime;
  }
  if (hashes.size() > 1 && !a.force) {
    std::ostringstream os;
    os << "stats: inputs come from " << hashes.size() << " different configs (";
    for (auto it = hashes.begin(); it != hashes.end(); ++it) {
      os << (it == hashes.begin() ? "" : ", ") << *it;
    }
    os << "); pass --force to combine them";
    throw UsageError(os.str());
  }

  const MetricsReport report = build_report(std::move(episodes));
  const fs::path dir = a.out.empty() ? fs::path(a.manifests.front()).parent_path() : fs::path(a.out);
  json hash_list = json::array();
  for (const auto &h : hashes) hash_list.push_back(h);
  json j{{"schema", kReportSchema},
         {"config_hash", hashes.size() == 1 ? json(*hashes.begin()) : json(nullptr)},
         {"config_hashes", hash_list},
         {"report", to_json(report)}};
  write_json(dir / "report.json", j);
  const std::string table = format_table(report);
  std::ostringstream txt;
  txt << "# " << kReportSchema << " config " << (hashes.size() == 1 ? *hashes.begin() : "mixed") << "\n" << table;
  write_text(dir / "report.txt", txt.str());
  std::cout << table;
  return 0;
}

// ---------------------------------------------------------------------------
// tune

struct TuneArgs
{
  std::string config;
  std::string out{"tune_out"};
  std::optional<unsigned> threads;
  std::vector<double> k;
  std::string previous;
};

json theta_json(const TuningConfig &t, const std::vector<double> &x)
{
  json th = json::object();
  for (std::size_t i = 0; i < t.free_params.size(); ++i) {
    th[t.free_params[i]] = x[i];
  }
  return th;
}

void write_session(const fs::path &dir, const ExperimentConfig &cfg, const TuningConfig &tcfg, const TuneResult &r)
{
  ExperimentConfig snap = cfg;
  snap.tuning = tcfg;
  const std::string hash = config_hash(snap);
  write_json(dir / "config.json", to_json(snap));

  std::ostringstream log;
  log << json{{"type", "header"}, {"schema", kTuneLogSchema}, {"config_hash", hash}, {"free_params", tcfg.free_params}}
             .dump()
      << '\n';
  for (std::size_t i = 0; i < r.log.size(); ++i) {
    log << json{{"type", "eval"},
                {"i", i},
                {"theta", theta_json(tcfg, r.log[i].x)},
                {"objective", r.log[i].value},
                {"best_so_far", r.best_so_far[i]}}
               .dump()
        << '\n';
  }
  write_text(dir / "evals.jsonl", log.str());
  write_json(dir / "best_theta.json", {{"schema", kThetaSchema},
                                       {"config_hash", hash},
                                       {"objective", r.best_value},
                                       {"evaluations", r.log.size()},
                                       {"theta", theta_json(tcfg, r.best)}});
}

TuneResult load_session_result(const fs::path &dir, const TuningConfig &tcfg)
{
  std::ifstream is(dir / "evals.jsonl");
  if (!is) {
    throw UsageError("--previous: cannot open '" + (dir / "evals.jsonl").string() + "'");
  }
  TuneResult r;
  r.best_value = std::numeric_limits<double>::infinity();
  std::string line;
  while (std::getline(is, line)) {
    const json j = json::parse(line);
    if (j.at("type") != "eval") continue;
    TuneEvaluation ev;
    for (const auto &name : tcfg.free_params) {
      ev.x.push_back(j.at("theta").at(name).get<double>());
    }
    ev.value = j.at("objective").is_number() ? j.at("objective").get<double>()
                                             : std::numeric_limits<double>::infinity();
    if (ev.value < r.best_value || r.best.empty()) {
      r.best_value = ev.value;
      r.best = ev.x;
    }
    r.best_so_far.push_back(r.best_value);
    r.log.push_back(std::move(ev));
  }
  if (r.log.empty()) {
    throw UsageError("--previous: no evaluations in '" + dir.string() + "'");
  }
  return r;
}

int cmd_tune(const TuneArgs &a)
{
  const ExperimentConfig cfg = config_or_default(a.config);
  const unsigned threads = a.threads.value_or(cfg.batch.threads);
  const fs::path dir(a.out);

  if (a.k.empty()) {
    const TuneResult r = tune(cfg.setup(), cfg.tuning, threads);
    write_session(dir, cfg, cfg.tuning, r);
    std::cout << (dir / "best_theta.json").string() << '\n';
    std::cerr << "best objective " << r.best_value << " after " << r.log.size() << " evaluations\n";
    return 0;
  }

  if (a.k.size() != 4) {
    throw UsageError("--k: expected four values k1,k2,k3,k4");
  }
  if (a.previous.empty()) {
    throw UsageError("--k: requires --previous <tuning session directory>");
  }
  const ExperimentConfig prev_cfg = load_config(fs::path(a.previous) / "config.json");
  const TuneResult prev = load_session_result(a.previous, prev_cfg.tuning);
  const ExpertStep step = expert_loop_step(cfg.setup(), prev_cfg.tuning, prev, {a.k[0], a.k[1], a.k[2], a.k[3]}, threads);
  write_session(dir, cfg, step.config, step.result);
  write_json(dir / "comparison.json", step.report);
  write_text(dir / "comparison.txt", step.text);
  std::cout << step.text;
  return 0;
}

// ---------------------------------------------------------------------------
// serve

struct ServeArgs
{
  std::string config;
  std::optional<std::string> bind;
  std::optional<unsigned short> port;
  std::optional<double> tick_rate;
  std::optional<std::string> controller;
  std::optional<std::string> static_dir;
};

int cmd_serve(const ServeArgs &a)
{
  ExperimentConfig cfg = config_or_default(a.config);
  if (a.bind) cfg.serve.bind = *a.bind;
  if (a.port) cfg.serve.port = *a.port;
  if (a.tick_rate) cfg.serve.tick_rate = *a.tick_rate;
  if (a.controller) cfg.serve.controller = controller_from_string(*a.controller);
  if (a.static_dir) cfg.serve.static_dir = *a.static_dir;
  cfg.validate();

  // Block the shutdown signals before the I/O thread exists so that only
  // this thread receives them.
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);

  ServerOptions opt{cfg, cfg.serve.bind, cfg.serve.port, cfg.serve.static_dir};
  WsServer server(std::move(opt));
  std::cerr << "serving on http://" << cfg.serve.bind << ':' << server.port() << "/ (websocket at /ws), "
            << cfg.serve.tick_rate << " Hz, controller " << to_string(cfg.serve.controller) << '\n';
  std::thread io([&] { server.run(); });
  int sig = 0;
  sigwait(&set, &sig);
  server.stop();
  io.join();
  return 0;
}

}  // namespace

int main(int argc, char **argv)
{
  CLI::App app{"Vehicle-pedestrian crossing simulator"};
  app.require_subcommand(1);

  RunArgs run;
  auto *run_cmd = app.add_subcommand("run", "Run one episode and write its trace");
  run_cmd->add_option("-c,--config", run.config, "Config file (defaults if omitted)");
  run_cmd->add_option("-s,--scenario", run.scenario, "crossing | remaining | delayed_crossing | delayed_remaining");
  run_cmd->add_option("-k,--controller", run.controller, "iampdm | rbdm | nia");
  run_cmd->add_option("--seed", run.seed, "Scenario seed");
  run_cmd->add_option("-o,--out", run.out, "Trace path");
  run_cmd->add_option("--theta", run.theta, "best_theta.json from a tuning session");

  BatchArgs batch;
  auto *batch_cmd = app.add_subcommand("batch", "Run the scenario x controller x seed grid");
  batch_cmd->add_option("-c,--config", batch.config, "Config file");
  batch_cmd->add_option("-o,--out", batch.out, "Output directory");
  batch_cmd->add_option("-j,--threads", batch.threads, "Worker threads (0 = all cores)");

  StatsArgs stats;
  auto *stats_cmd = app.add_subcommand("stats", "Summarise batch traces and run the significance tests");
  stats_cmd->add_option("manifest", stats.manifests, "manifest.json file(s)")->required()->check(CLI::ExistingFile);
  stats_cmd->add_option("-o,--out", stats.out, "Output directory (default: next to the first manifest)");
  stats_cmd->add_flag("--force", stats.force, "Combine inputs produced by different configs");

  TuneArgs tune_args;
  auto *tune_cmd = app.add_subcommand("tune", "Tune IAMPDM parameters against the global cost");
  tune_cmd->add_option("-c,--config", tune_args.config, "Config file");
  tune_cmd->add_option("-o,--out", tune_args.out, "Session directory");
  tune_cmd->add_option("-j,--threads", tune_args.threads, "Worker threads (0 = all cores)");
  tune_cmd->add_option("--k", tune_args.k, "New k1,k2,k3,k4 for an expert-loop step")->delimiter(',');
  tune_cmd->add_option("--previous", tune_args.previous, "Previous session directory (with --k)");

  ServeArgs serve;
  auto *serve_cmd = app.add_subcommand("serve", "Serve the interactive pedestrian session over websocket");
  serve_cmd->add_option("-c,--config", serve.config, "Config file");
  serve_cmd->add_option("--bind", serve.bind, "Bind address");
  serve_cmd->add_option("--port", serve.port, "TCP port (0 = any free port)");
  serve_cmd->add_option("--tick-rate", serve.tick_rate, "Plant tick rate [Hz]");
  serve_cmd->add_option("--controller", serve.controller, "Default controller");
  serve_cmd->add_option("--static-dir", serve.static_dir, "Directory with the UI bundle");

  std::string show_config;
  auto *config_cmd = app.add_subcommand("config", "Print the canonical config (defaults when no file is given)");
  config_cmd->add_option("file", show_config, "Config file");
  bool show_hash = false;
  config_cmd->add_flag("--hash", show_hash, "Print only the config hash");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitValidation;
  }

  try {
    if (*run_cmd) return cmd_run(run);
    if (*batch_cmd) return cmd_batch(batch);
    if (*stats_cmd) return cmd_stats(stats);
    if (*tune_cmd) return cmd_tune(tune_args);
    if (*serve_cmd) return cmd_serve(serve);
    if (*config_cmd) {
      const ExperimentConfig cfg = config_or_default(show_config);
      std::cout << (show_hash ? config_hash(cfg) : to_json(cfg).dump(2)) << '\n';
      return 0;
    }
  } catch (const std::invalid_argument &e) {
    // ConfigError, UsageError and name lookups all land here.
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return 0;
}
