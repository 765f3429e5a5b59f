// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any FAIL.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "pedsim/iampdm.hpp"
#include "pedsim/report.hpp"
#include "pedsim/stats.hpp"
#include "pedsim/trace_io.hpp"
#include "pedsim/tuning.hpp"

using namespace pedsim;

namespace {

struct Outcome_
{
  bool ok{true};
  std::string detail;
};

/// Collects failed sub-checks of one criterion.
class Check
{
public:
  void expect(bool cond, const std::string &what)
  {
    if (!cond) {
      ok_ = false;
      if (failures_++ < 3) {
        if (!detail_.empty()) detail_ += "; ";
        detail_ += what;
      }
    }
  }
  void note(const std::string &s)
  {
    if (!notes_.empty()) notes_ += ", ";
    notes_ += s;
  }
  Outcome_ result() const
  {
    std::string d = notes_;
    if (!ok_) d = detail_ + (failures_ > 3 ? " (+" + std::to_string(failures_ - 3) + " more)" : "") + (d.empty() ? "" : " | " + d);
    return {ok_, d};
  }

private:
  bool ok_{true};
  int failures_{0};
  std::string detail_;
  std::string notes_;
};

std::string fmt(const char *f, double v)
{
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

oracle::MpcWeights weights_for(const MpcProblem &p)
{
  oracle::MpcWeights w;
  const auto &c = p.params;
  const auto s = p.safety();
  w.w_com = c.w_com;
  w.w_ref_veh = c.w_ref_veh;
  w.w_ref_ped = c.w_ref_ped;
  w.w_safe = s.w_safe;
  w.d_min = s.d_min;
  w.v_veh_ref = c.v_veh_ref;
  w.v_ped_ref = c.v_ped_ref;
  w.v_max = c.v_veh_max;
  w.a_min = c.a_min;
  w.a_max = c.a_max;
  w.eps_safe = c.eps_safe;
  w.dt = c.dt;
  return w;
}

// ---------------------------------------------------------------------------

Outcome_ sigmoid_model()
{
  Check c;
  const double cs[] = {0.5, 2.0, 4.0, 6.0};
  for (double cc : cs) c.expect(crossing_gain(cc, cc) == 0.5, "gain(c, c) != 0.5 for c=" + fmt("%g", cc));
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> U(-50.0, 50.0);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double d = U(rng), cc = cs[i % 4];
    worst = std::max(worst, std::abs(crossing_gain(cc + d, cc) + crossing_gain(cc - d, cc) - 1.0));
  }
  c.expect(worst <= 1e-12, "symmetry residual " + fmt("%.3g", worst));
  // Far-future conflict: every pedestrian walks at the reference speed.
  const ScenarioGeometry g;
  double asym = 0.0;
  for (double cc : cs) {
    const PedModelParams p{cc, 1.4, 1.0, 0.05};
    asym = std::max(asym, std::abs(ped_next_velocity({0, -500.0, 1.0, -6.0, 0.0}, g, p) - 1.4));
  }
  c.expect(asym < 1e-9, "asymptote error " + fmt("%.3g", asym));
  c.note("symmetry max residual " + fmt("%.2g", worst));
  c.note("asymptote error " + fmt("%.2g", asym));
  return c.result();
}

Outcome_ batch_vs_rollout()
{
  Check c;
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  double worst = 0.0;
  for (int inst = 0; inst < 200; ++inst) {
    const int N = 1 + inst % 20;
    const auto ops = build_batch(N, 0.2);
    const JointState x0{0, 50 * U(rng), 6 + 6 * U(rng), 8 * U(rng), 1.4 * U(rng)};
    std::vector<double> u(N), z(N);
    for (int k = 0; k < N; ++k) {
      u[k] = 3 * U(rng);
      z[k] = 1.4 * U(rng);
    }
    const auto traj = predict(x0, u, z, ops);
    JointState s = x0;
    for (int k = 0; k < N; ++k) {
      s = step(s, u[k], z[k], 0.2);
      worst = std::max({worst, std::abs(traj[k].x_veh - s.x_veh), std::abs(traj[k].v_veh - s.v_veh),
                        std::abs(traj[k].y_ped - s.y_ped), std::abs(traj[k].v_ped - s.v_ped)});
    }
  }
  c.expect(worst <= 1e-9, "max deviation " + fmt("%.3g", worst));
  c.note("200 instances, max deviation " + fmt("%.2g", worst));
  return c.result();
}

Outcome_ mpc_oracle()
{
  Check c;
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> ux(-35.0, -6.0), uv(0.0, 11.0), uy(-7.5, 1.5), uvp(0.0, 1.4), ui(0.0, 1.0);
  int grid_feasible = 0, infeasible = 0;
  double worst_gap = -INFINITY, worst_res = 0.0;
  for (int i = 0; i < 50; ++i) {
    MpcProblem p;
    p.params.N = 3;
    p.x0 = {0, ux(rng), uv(rng), uy(rng), uvp(rng)};
    p.intention_effective = ui(rng);
    const auto w = weights_for(p);
    const oracle::State s0{p.x0.x_veh, p.x0.v_veh, p.x0.y_ped, p.x0.v_ped};
    double best = INFINITY;
    const double levels[] = {p.params.a_min, 0.0, p.params.a_max};
    for (double a : levels)
      for (double b : levels)
        for (double d : levels) {
          const auto r = oracle::mpc_cost(s0, {a, b, d}, w, {});
          if (r.feasible) best = std::min(best, r.total);
        }
    const auto sol = solve(p);
    if (sol.status == SolveStatus::Infeasible) {
      ++infeasible;
      c.expect(!std::isfinite(best), "solver infeasible where grid point " + std::to_string(i) + " is feasible");
      continue;
    }
    const auto mine = oracle::mpc_cost(s0, sol.u, w, {}, 1e-6);
    worst_res = std::max(worst_res, mine.worst);
    c.expect(mine.feasible, "state " + std::to_string(i) + " residual " + fmt("%.3g", mine.worst));
    c.expect(std::abs(mine.total - sol.cost.total) <= 1e-9 * std::max(1.0, mine.total),
             "state " + std::to_string(i) + " reported cost differs from oracle");
    if (std::isfinite(best)) {
      ++grid_feasible;
      worst_gap = std::max(worst_gap, mine.total - best);
      c.expect(mine.total <= best + 1e-6, "state " + std::to_string(i) + " above grid by " + fmt("%.3g", mine.total - best));
    }
  }
  c.note(std::to_string(grid_feasible) + "/50 grid-feasible");
  c.note(std::to_string(infeasible) + " infeasible");
  c.note("max(solver - grid) " + fmt("%.3g", worst_gap));
  c.note("max residual " + fmt("%.2g", worst_res));
  return c.result();
}

Outcome_ deadlock()
{
  Check c;
  SimConfig sim;
  sim.T_max = 60.0;
  sim.initial = {0, -45.0, 8.33, -3.0, 0.0};
  double prev = INFINITY;
  std::string ends;
  for (double K_d : {0.5, 1.0, 2.0}) {
    ControllerParams params;
    params.K_d = K_d;
    EpisodeRunner r(ControllerKind::Iampdm, params, {}, sim);
    while (!r.finished()) r.step({0.0, 1.0}, true);
    const auto &t = r.trace();
    c.expect(t.outcome == Outcome::VehFirst, "K_d=" + fmt("%g", K_d) + " outcome " + std::string(to_string(t.outcome)));
    c.expect(t.T_end < 60.0, "K_d=" + fmt("%g", K_d) + " T_end " + fmt("%.2f", t.T_end));
    c.expect(t.T_end <= prev, "T_end increased at K_d=" + fmt("%g", K_d));
    prev = t.T_end;
    ends += (ends.empty() ? "" : "/") + fmt("%.2f", t.T_end);
  }
  c.note("T_end " + ends + " s for K_d 0.5/1/2");
  return c.result();
}

Outcome_ behavioral_ordering()
{
  Check c;
  BatchSetup setup;
  std::vector<std::uint64_t> seeds;
  for (std::uint64_t s = 1; s <= 100; ++s) seeds.push_back(s);
  const std::vector<ControllerKind> ctrls{ControllerKind::Iampdm, ControllerKind::Rbdm, ControllerKind::Nia};
  for (auto scen : {ScenarioKind::DelayedCrossing, ScenarioKind::DelayedRemaining}) {
    const auto traces = run_batch(make_grid({scen}, ctrls, seeds), setup);
    double t_end[3] = {}, ttc[3] = {};
    for (const auto &t : traces) {
      if (!t.error.empty()) {
        c.expect(false, "episode error: " + t.error);
        continue;
      }
      const int k = static_cast<int>(controller_from_string(t.controller));
      const auto avg = episode_averages(t, setup.geometry);
      t_end[k] += avg.T_end / 100.0;
      ttc[k] += avg.ttc_avg / 100.0;
    }
    const int I = 0, R = 1, N = 2;
    const std::string name(to_string(scen));
    if (scen == ScenarioKind::DelayedRemaining) {
      c.expect(t_end[N] > t_end[R], name + ": T_end NIA <= RBDM");
      c.expect(t_end[N] > t_end[I], name + ": T_end NIA <= IAMPDM");
    }
    c.expect(ttc[N] > 2.0 * ttc[I], name + ": TTC NIA <= 2x IAMPDM");
    c.expect(ttc[N] > 2.0 * ttc[R], name + ": TTC NIA <= 2x RBDM");
    c.note(name + " T_end I/R/N " + fmt("%.2f", t_end[I]) + "/" + fmt("%.2f", t_end[R]) + "/" + fmt("%.2f", t_end[N]) +
           " TTC I/R/N " + fmt("%.2f", ttc[I]) + "/" + fmt("%.2f", ttc[R]) + "/" + fmt("%.2f", ttc[N]));
  }
  return c.result();
}

Outcome_ statistics()
{
  Check c;
  std::mt19937_64 rng(6);
  std::normal_distribution<double> Nd(0.0, 1.0);
  double worst = 0.0;
  int decisions = 0;
  for (int i = 0; i < 100; ++i) {
    std::vector<std::vector<double>> g(3);
    for (int k = 0; k < 3; ++k) {
      g[k].resize(4 + (i + k) % 9);
      for (auto &v : g[k]) v = i % 2 ? std::round(2 * Nd(rng) + k) : Nd(rng) + 0.6 * k;
    }
    const auto r = kruskal_wallis(g);
    const double h = oracle::kruskal_h(g);
    worst = std::max(worst, std::abs(r.H - h));
    c.expect(r.significant == (h >= 9.21), "threshold decision differs on instance " + std::to_string(i));
    decisions += r.significant;
  }
  c.expect(worst <= 1e-9, "H deviation " + fmt("%.3g", worst));
  c.expect(kKruskalCritical == 9.21, "critical value");
  const std::vector<double> a{1, 2, 3}, b{10, 11, 12};
  const auto mw = mann_whitney(a, b);
  const double enum_p = oracle::mann_whitney_exact_p(a, b);
  c.expect(std::abs(mw.p - 0.1) < 1e-12 && std::abs(enum_p - 0.1) < 1e-12,
           "MW p " + fmt("%.6g", mw.p) + " enumeration " + fmt("%.6g", enum_p));
  c.note("KW max |H - oracle| " + fmt("%.2g", worst));
  c.note(std::to_string(decisions) + "/100 significant");
  c.note("MW p " + fmt("%.3g", mw.p));
  return c.result();
}

Outcome_ metrics_plumbing()
{
  Check c;
  const ScenarioGeometry g;
  c.expect(kKappa == 0.05 && kSafetyTime == 1.0, "constants");
  // Standstill: TTC divides by kappa.
  c.expect(std::abs(ttc_metric({0, -10.0, 0.0, -3.0, 0.0}, g) - 13.0 / 0.05) < 1e-9, "TTC kappa guard");
  // t_safe = 1 adds v_veh metres to the DST denominator.
  c.expect(std::abs(dst_metric({0, -20.0, 10.0, -3.0, 1.4}, g) - 0.5 * (100.0 + 1.96) / 33.0) < 1e-12, "DST t_safe");
  c.expect(std::abs(dst_metric({0, 0.0, 0.0, 0.0, 1.0}, g) - 0.5 / 0.05) < 1e-12, "DST kappa floor");

  auto make = [](double slope) {
    EpisodeTrace t;
    for (int i = 0; i <= 200; ++i) {
      TraceRecord r;
      const double time = 0.05 * i;
      // Vehicle parked 13 m of combined gap away with speed 5, so TTC = 2.6 + ramp.
      r.state = {time, -10.0 - slope * 5.0 * time, 5.0, -3.0, 0.0};
      t.records.push_back(r);
    }
    t.T_end = 10.0;
    return t;
  };
  const auto constant = episode_averages(make(0.0), g);
  c.expect(std::abs(constant.ttc_avg - 2.6) <= 0.01 * 2.6, "constant TTC_avg " + fmt("%.6g", constant.ttc_avg));
  // Linear gap growth: TTC goes 2.6 -> 2.6 + slope*10, average 2.6 + slope*5.
  const auto linear = episode_averages(make(1.0), g);
  c.expect(std::abs(linear.ttc_avg - 7.6) <= 0.01 * 7.6, "linear TTC_avg " + fmt("%.6g", linear.ttc_avg));
  c.note("constant " + fmt("%.4f", constant.ttc_avg) + " (2.6)");
  c.note("linear " + fmt("%.4f", linear.ttc_avg) + " (7.6)");
  return c.result();
}

Outcome_ determinism()
{
  Check c;
  BatchSetup setup;
  auto body = [](const EpisodeTrace &t) {
    std::ostringstream os;
    write_trace(os, t, "h");
    return os.str();
  };
  auto jobs = make_grid({ScenarioKind::Crossing, ScenarioKind::Remaining, ScenarioKind::DelayedCrossing,
                         ScenarioKind::DelayedRemaining},
                        {ControllerKind::Iampdm, ControllerKind::Rbdm, ControllerKind::Nia}, {1, 2});
  std::vector<std::string> first;
  for (const auto &j : jobs) first.push_back(body(run_job(j, setup)));
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    c.expect(body(run_job(jobs[i], setup)) == first[i], "rerun differs for job " + std::to_string(i));
  }
  std::reverse(jobs.begin(), jobs.end());
  const auto batch = run_batch(jobs, setup, 4);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    c.expect(body(batch[i]) == first[i], "batch order changed trace " + std::to_string(i));
  }
  c.note(std::to_string(first.size()) + " episodes, sequential x2 and reversed batch");
  return c.result();
}

Outcome_ tuning_sanity()
{
  Check c;
  const std::vector<double> target{0.3, -1.2, 2.5, 0.7};
  const Objective f = [&](const std::vector<double> &x) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += (1.0 + i) * (x[i] - target[i]) * (x[i] - target[i]);
    return s;
  };
  const auto r = minimize_bounded(f, {0, 0, 0, 0}, std::vector<double>(4, -5.0), std::vector<double>(4, 5.0), 200, 6, 7);
  double dist = 0.0;
  for (std::size_t i = 0; i < 4; ++i) dist += (r.best[i] - target[i]) * (r.best[i] - target[i]);
  dist = std::sqrt(dist);
  c.expect(dist < 1e-2, "distance " + fmt("%.3g", dist));
  c.expect(r.log.size() <= 200, "evaluations " + std::to_string(r.log.size()));

  EpisodeTrace t;
  for (int i = 0; i <= 120; ++i) {
    TraceRecord rec;
    rec.state = {0.05 * i, -30.0 + 5.0 * 0.05 * i, 5.0, -3.0, 0.0};
    rec.u_cmd = 0.8;
    t.records.push_back(rec);
  }
  t.T_end = 6.0;
  TuningConfig k;
  k.k1 = k.k2 = k.k3 = k.k4 = 0.0;
  const ScenarioGeometry g;
  const ControllerParams p;
  c.expect(j_glob(t, k, g, p) == 0.0, "zero weights");
  k.k1 = 1.0;
  const double jt = j_glob(t, k, g, p);
  c.expect(std::abs(jt - 18.0) <= 0.01 * 18.0, "k1 integral " + fmt("%.6g", jt));
  k.k1 = 0.0;
  k.k2 = 1.0;
  const double ju = j_glob(t, k, g, p);
  c.expect(std::abs(ju - 0.64 * 6.0) <= 0.01 * 3.84, "k2 integral " + fmt("%.6g", ju));
  k.k2 = 0.0;
  k.k3 = 1.0;
  double dmin = INFINITY;
  for (const auto &rec : t.records) dmin = std::min(dmin, std::hypot(rec.state.x_veh, rec.state.y_ped));
  c.expect(std::abs(j_glob(t, k, g, p) + dmin) <= 0.01 * dmin, "k3 separation");
  c.note("convex distance " + fmt("%.2g", dist) + " after " + std::to_string(r.log.size()) + " evaluations");
  return c.result();
}

struct Criterion
{
  const char *id;
  double limit_s;
  std::function<Outcome_()> run;
};

}  // namespace

int main()
{
  const std::vector<Criterion> criteria{
      {"sigmoid-model", 1.0, sigmoid_model},
      {"batch-vs-rollout", 5.0, batch_vs_rollout},
      {"mpc-oracle", 60.0, mpc_oracle},
      {"deadlock-resolution", 30.0, deadlock},
      {"behavioral-ordering", 600.0, behavioral_ordering},
      {"statistics", 10.0, statistics},
      {"metrics-plumbing", 10.0, metrics_plumbing},
      {"determinism", 300.0, determinism},
      {"tuning-sanity", 60.0, tuning_sanity},
  };
  int failed = 0;
  for (const auto &cr : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome_ o;
    try {
      o = cr.run();
    } catch (const std::exception &e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (secs >= cr.limit_s) {
      o.ok = false;
      o.detail += " | runtime over " + fmt("%g", cr.limit_s) + " s";
    }
    failed += o.ok ? 0 : 1;
    std::printf("%s %-20s %7.2fs  %s\n", o.ok ? "PASS" : "FAIL", cr.id, secs, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%zu criteria, %d failed\n", criteria.size(), failed);
  return failed == 0 ? 0 : 1;
}
