#include "pedsim/sim.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <stdexcept>
#include <string>
#include <thread>
#include <tuple>

namespace pedsim {

std::string_view to_string(Outcome o)
{
  switch (o) {
    case Outcome::PedFirst: return "ped_first";
    case Outcome::VehFirst: return "veh_first";
    case Outcome::Timeout: return "timeout";
  }
  return "?";
}

Outcome outcome_from_string(std::string_view s)
{
  if (s == "ped_first") return Outcome::PedFirst;
  if (s == "veh_first") return Outcome::VehFirst;
  if (s == "timeout") return Outcome::Timeout;
  throw std::invalid_argument("outcome: unknown value '" + std::string(s) + "'");
}

void SimConfig::validate(const ControllerParams &params) const
{
  if (!(dt_sim > 0.0)) {
    throw std::invalid_argument("sim.dt_sim: must be > 0");
  }
  if (controller_every < 1) {
    throw std::invalid_argument("sim.controller_every: must be >= 1");
  }
  if (std::abs(controller_every * dt_sim - params.dt) > 1e-9) {
    throw std::invalid_argument("sim.controller_every: controller_every * dt_sim must equal params.dt");
  }
  if (!(T_max > 0.0)) {
    throw std::invalid_argument("sim.T_max: must be > 0");
  }
  if (!(ped_lag > 0.0)) {
    throw std::invalid_argument("sim.ped_lag: must be > 0");
  }
  if (!initial.finite() || initial.v_veh < 0.0) {
    throw std::invalid_argument("sim.initial: must be finite with v_veh >= 0");
  }
}

EpisodeRunner::EpisodeRunner(ControllerKind kind, const ControllerParams &params, const ScenarioGeometry &geometry,
                             const SimConfig &sim, const SolverOptions &solver)
    : params_(params), geometry_(geometry), sim_(sim), controller_(make_controller(kind, params, geometry, solver))
{
  sim_.validate(params_);
  reset();
}

void EpisodeRunner::reset()
{
  controller_->reset();
  state_ = sim_.initial;
  state_.t = 0.0;
  u_hold_ = 0.0;
  tick_ = 0;
  ped_passed_at_.reset();
  veh_passed_at_.reset();
  finished_ = false;
  trace_ = {};
  trace_.controller = std::string(to_string(controller_->kind()));
  trace_.dt_sim = sim_.dt_sim;
}

const TraceRecord &EpisodeRunner::step(const PedCommand &cmd, bool released)
{
  if (finished_) {
    throw std::logic_error("EpisodeRunner::step: episode already finished");
  }
  const JointState s = state_;
  if (!ped_passed_at_ && is_ped_passed(s, geometry_)) {
    ped_passed_at_ = s.t;
  }
  if (!veh_passed_at_ && is_veh_passed(s, geometry_)) {
    veh_passed_at_ = s.t;
  }

  TraceRecord rec;
  rec.state = s;
  rec.zone = classify_zone(s.y_ped, geometry_);
  rec.ped_target = cmd.target_speed;
  rec.intention_raw = std::clamp(cmd.intention, 0.0, 1.0);

  const bool done = veh_passed_at_ && (ped_passed_at_ || released);
  const bool timeout = !done && s.t >= sim_.T_max - 1e-9;

  if (!done && !timeout) {
    const bool due = tick_ % static_cast<std::uint64_t>(sim_.controller_every) == 0;
    if (due) {
      const auto start = std::chrono::steady_clock::now();
      const double u = std::clamp(controller_->decide(s, rec.intention_raw), params_.a_min, params_.a_max);
      const std::chrono::duration<double> took = std::chrono::steady_clock::now() - start;
      rec.controller_tick = true;
      if (budget_ && took.count() > *budget_) {
        rec.flags.emplace_back("overrun");
      } else {
        u_hold_ = u;
      }
    } else {
      controller_->observe(s, rec.intention_raw);
    }
  }
  rec.diag = controller_->diagnostics();
  rec.intention_eff = controller_->kind() == ControllerKind::Nia ? 0.0 : controller_->observe(s, rec.intention_raw);
  rec.u_cmd = u_hold_;
  trace_.records.push_back(std::move(rec));

  if (done || timeout) {
    finished_ = true;
    if (done) {
      trace_.T_end = s.t;
      trace_.outcome = ped_passed_at_ && *ped_passed_at_ < *veh_passed_at_ ? Outcome::PedFirst : Outcome::VehFirst;
    } else {
      trace_.T_end = sim_.T_max;
      trace_.outcome = Outcome::Timeout;
    }
    return trace_.records.back();
  }

  // Vehicle: double integrator, speed held inside [0, v_veh_max] at the plant.
  const double dt = sim_.dt_sim;
  const double u = u_hold_;
  JointState n = s;
  double v_new = s.v_veh + u * dt;
  if (v_new < 0.0 || v_new > params_.v_veh_max) {
    const double v_lim = v_new < 0.0 ? 0.0 : params_.v_veh_max;
    const double ts = u != 0.0 ? std::clamp((v_lim - s.v_veh) / u, 0.0, dt) : 0.0;
    n.x_veh = s.x_veh + s.v_veh * ts + 0.5 * u * ts * ts + v_lim * (dt - ts);
    v_new = v_lim;
  } else {
    n.x_veh = s.x_veh + s.v_veh * dt + 0.5 * u * dt * dt;
  }
  n.v_veh = v_new;

  // Pedestrian: exact first-order lag toward the target speed.
  const double alpha = 1.0 - std::exp(-dt / sim_.ped_lag);
  const double target = cmd.target_speed;
  n.v_ped = s.v_ped + (target - s.v_ped) * alpha;
  n.y_ped = s.y_ped + target * dt + (s.v_ped - target) * sim_.ped_lag * alpha;

  ++tick_;
  n.t = static_cast<double>(tick_) * dt;
  state_ = n;
  return trace_.records.back();
}

EpisodeTrace run_episode(const ScenarioScript &script, ControllerKind controller, const ScenarioGeometry &geometry,
                         const ControllerParams &params, const SimConfig &sim, const SolverOptions &solver)
{
  EpisodeRunner runner(controller, params, geometry, sim, solver);
  ScriptedPedestrian ped(script, geometry, params.v_ped_ref);
  while (!runner.finished()) {
    const PedCommand cmd = ped.step(runner.state(), sim.dt_sim);
    runner.step(cmd, ped.released());
  }
  EpisodeTrace trace = runner.take_trace();
  trace.scenario = std::string(to_string(script.kind));
  trace.seed = script.rng_seed;
  return trace;
}

bool BatchJob::operator<(const BatchJob &o) const
{
  return std::tie(scenario, controller, seed) < std::tie(o.scenario, o.controller, o.seed);
}

std::vector<BatchJob> make_grid(const std::vector<ScenarioKind> &scenarios,
                                const std::vector<ControllerKind> &controllers, const std::vector<std::uint64_t> &seeds)
{
  std::vector<BatchJob> jobs;
  jobs.reserve(scenarios.size() * controllers.size() * seeds.size());
  for (auto s : scenarios) {
    for (auto c : controllers) {
      for (auto seed : seeds) {
        jobs.push_back({s, c, seed});
      }
    }
  }
  std::sort(jobs.begin(), jobs.end());
  return jobs;
}

EpisodeTrace run_job(const BatchJob &job, const BatchSetup &setup)
{
  const ScenarioScript script = make_script(job.scenario, setup.scripts, job.seed, setup.geometry);
  return run_episode(script, job.controller, setup.geometry, setup.params, setup.sim, setup.solver);
}

std::vector<EpisodeTrace> run_batch(std::vector<BatchJob> jobs, const BatchSetup &setup, unsigned threads)
{
  std::stable_sort(jobs.begin(), jobs.end());
  std::vector<EpisodeTrace> out(jobs.size());
  if (threads == 0) {
    threads = std::max(1u, std::thread::hardware_concurrency());
  }
  threads = std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(jobs.size(), 1)));

  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      try {
        out[i] = run_job(jobs[i], setup);
      } catch (const std::exception &e) {
        EpisodeTrace t;
        t.scenario = std::string(to_string(jobs[i].scenario));
        t.controller = std::string(to_string(jobs[i].controller));
        t.seed = jobs[i].seed;
        t.dt_sim = setup.sim.dt_sim;
        t.error = e.what();
        out[i] = std::move(t);
      }
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned k = 0; k < threads; ++k) {
      pool.emplace_back(worker);
    }
  }
  return out;
}

}  // namespace pedsim
