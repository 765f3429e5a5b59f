#include "pedsim/iampdm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace pedsim {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double sq(double v) { return v * v; }

struct Evaluation
{
  CostBreakdown cost;
  double min_slack{kInf};     // min_k (r_k^2 - d^2)
  double log_barrier{0.0};    // sum_k log(slack_k / d^2), valid when min_slack > 0
  double clip_sq{0.0};        // sum_k (u_k - u_eff_k)^2
  double speed_violation{0.0};
};

// Evaluates J_MPC and constraint slacks for a candidate input sequence. The
// clip-aware mode maps u onto the inputs that keep the vehicle speed inside
// [0, v_veh_max]; the raw mode uses u verbatim.
class Evaluator
{
public:
  explicit Evaluator(const MpcProblem &p)
      : p_(p), prm_(p.params), ped_(PedModelParams::from(p.params)), N_(static_cast<std::size_t>(p.params.N))
  {
    const auto safety = p.safety();
    w_safe_ = safety.w_safe;
    d2_ = sq(safety.d_min);
    if (prm_.prediction_mode == PredictionMode::FrozenZ) {
      ops_ = build_batch(prm_.N, prm_.dt);
    }
    u_eff_.resize(N_);
    traj_.resize(N_);
  }

  std::size_t horizon() const { return N_; }
  double d2() const { return d2_; }

  void freeze(std::vector<double> z)
  {
    z_ = std::move(z);
    Eigen::VectorXd zz = Eigen::VectorXd::Zero(4 * prm_.N);
    for (int k = 0; k < prm_.N; ++k) {
      zz(4 * k + 3) = z_[k];
    }
    base_ = ops_.A_cal * to_vector(p_.x0) + ops_.Z_cal * zz;
  }
  bool frozen() const { return prm_.prediction_mode == PredictionMode::FrozenZ; }
  const std::vector<double> &frozen_z() const { return z_; }

  const Evaluation &evaluate(std::span<const double> u, bool clip)
  {
    ev_ = Evaluation{};
    // Effective inputs.
    double v = p_.x0.v_veh;
    for (std::size_t k = 0; k < N_; ++k) {
      double ue = u[k];
      if (clip) {
        const double lo = std::max(prm_.a_min, -v / prm_.dt);
        const double hi = std::min(prm_.a_max, (prm_.v_veh_max - v) / prm_.dt);
        ue = std::clamp(ue, std::min(lo, hi), hi);
        ue = std::clamp(ue, prm_.a_min, prm_.a_max);
        ev_.clip_sq += sq(u[k] - ue);
      }
      u_eff_[k] = ue;
      v += prm_.dt * ue;
    }

    if (frozen()) {
      Eigen::Map<const Eigen::VectorXd> uu(u_eff_.data(), prm_.N);
      const Eigen::VectorXd xs = base_ + ops_.B_cal * uu;
      for (int k = 0; k < prm_.N; ++k) {
        traj_[k] = from_vector(xs.segment<4>(4 * k), p_.x0.t + (k + 1) * prm_.dt);
      }
    } else {
      JointState s = p_.x0;
      for (std::size_t k = 0; k < N_; ++k) {
        s = step(s, u_eff_[k], ped_next_velocity(s, p_.geometry, ped_), prm_.dt);
        traj_[k] = s;
      }
    }

    double sum_r2 = 0.0;
    for (std::size_t k = 0; k < N_; ++k) {
      const JointState &s = traj_[k];
      ev_.cost.com += prm_.w_com * sq(u_eff_[k]);
      if (prm_.ref_cost_form == RefCostForm::Deviation) {
        ev_.cost.ref += prm_.w_ref_veh * sq(s.v_veh - prm_.v_veh_ref) + prm_.w_ref_ped * sq(s.v_ped - prm_.v_ped_ref);
      } else {
        ev_.cost.ref += prm_.w_ref_veh * sq(s.v_veh) + prm_.w_ref_ped * sq(s.v_ped);
      }
      const double r2 = sq(s.x_veh - p_.geometry.conflict_x) + sq(s.y_ped - p_.geometry.conflict_y);
      sum_r2 += r2;
      const double slack = r2 - d2_;
      ev_.min_slack = std::min(ev_.min_slack, slack);
      if (d2_ > 0.0 && slack > 0.0) {
        ev_.log_barrier += std::log(slack / d2_);
      }
      ev_.speed_violation = std::max({ev_.speed_violation, -s.v_veh, s.v_veh - prm_.v_veh_max});
    }
    ev_.cost.safe = w_safe_ > 0.0 ? w_safe_ / std::max(sum_r2, prm_.eps_safe) : 0.0;
    ev_.cost.total = ev_.cost.com + ev_.cost.ref + ev_.cost.safe;
    return ev_;
  }

  const std::vector<double> &effective_inputs() const { return u_eff_; }
  const std::vector<JointState> &trajectory() const { return traj_; }

  std::vector<double> realized_z() const
  {
    if (frozen()) {
      return z_;
    }
    std::vector<double> z(N_);
    for (std::size_t k = 0; k < N_; ++k) {
      z[k] = traj_[k].v_ped;
    }
    return z;
  }

private:
  const MpcProblem &p_;
  const ControllerParams &prm_;
  PedModelParams ped_;
  std::size_t N_;
  double w_safe_{0.0};
  double d2_{0.0};
  BatchOperators ops_;
  std::vector<double> z_;
  Eigen::VectorXd base_;
  std::vector<double> u_eff_;
  std::vector<JointState> traj_;
  Evaluation ev_;
};

// Best feasible point seen across every evaluation of a solve.
struct Incumbent
{
  std::vector<double> u;
  double cost{kInf};
  bool valid() const { return !u.empty(); }
};

class Solver
{
public:
  Solver(const MpcProblem &p, const SolverOptions &o) : p_(p), opt_(o), ev_(p), N_(ev_.horizon()) {}

  MpcSolution run(const std::optional<std::vector<double>> &warm_start)
  {
    const auto seeds = make_seeds(warm_start);
    if (ev_.frozen()) {
      std::vector<double> z = p_.frozen_z;
      if (z.size() != N_) {
        z = rollout_with_ped_model(p_.x0, seeds.front(), p_.geometry, PedModelParams::from(p_.params), p_.params.dt)
                .z_ped;
      }
      ev_.freeze(std::move(z));
    }

    // Rank seeds: feasible ones by cost.
    std::vector<std::pair<double, std::vector<double>>> feasible;
    for (const auto &s : seeds) {
      const auto &e = consider(s);
      if (e.min_slack >= -opt_.feas_tol) {
        feasible.emplace_back(e.cost.total, ev_.effective_inputs());
      }
    }
    std::stable_sort(feasible.begin(), feasible.end(),
                     [](const auto &a, const auto &b) { return a.first < b.first; });

    bool capped = false;
    if (feasible.empty()) {
      auto start = restore_feasibility(seeds);
      if (!start) {
        return finish(SolveStatus::Infeasible, constant(p_.params.a_min));
      }
      feasible.emplace_back(0.0, *start);
    }

    // Descend from the best seed, and from the runner-up when it is a distinct point.
    const std::size_t starts = std::min<std::size_t>(feasible.size(), 2);
    for (std::size_t i = 0; i < starts; ++i) {
      if (i == 1 && max_abs_diff(feasible[0].second, feasible[1].second) < 1e-6) {
        break;
      }
      capped = barrier_descent(feasible[i].second) || capped;
    }
    return finish(capped ? SolveStatus::MaxIters : SolveStatus::Optimal, incumbent_.u);
  }

private:
  static double max_abs_diff(const std::vector<double> &a, const std::vector<double> &b)
  {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      m = std::max(m, std::abs(a[i] - b[i]));
    }
    return m;
  }

  std::vector<double> constant(double a) const { return std::vector<double>(N_, a); }

  std::vector<std::vector<double>> make_seeds(const std::optional<std::vector<double>> &warm) const
  {
    const auto &prm = p_.params;
    std::vector<std::vector<double>> seeds;
    if (warm && warm->size() == N_) {
      seeds.push_back(*warm);
    }
    seeds.push_back(constant(0.0));
    seeds.push_back(constant(prm.a_min));
    seeds.push_back(constant(prm.a_max));
    {
      // velocity-tracking profile
      std::vector<double> u(N_);
      double v = p_.x0.v_veh;
      for (auto &uk : u) {
        uk = std::clamp(prm.k_p * (prm.v_veh_ref - v), prm.a_min, prm.a_max);
        v += prm.dt * uk;
      }
      seeds.push_back(std::move(u));
    }
    {
      // comfortable stop spread over the horizon
      const double a = std::clamp(-p_.x0.v_veh / (prm.N * prm.dt), prm.a_min, 0.0);
      seeds.push_back(constant(a));
    }
    // Lattice of {a_min, 0, a_max}^N for short horizons.
    std::size_t count = 1;
    for (std::size_t k = 0; k < N_ && count <= opt_.lattice_limit; ++k) {
      count *= 3;
    }
    if (count <= opt_.lattice_limit) {
      const double levels[3] = {prm.a_min, 0.0, prm.a_max};
      for (std::size_t idx = 0; idx < count; ++idx) {
        std::vector<double> u(N_);
        std::size_t r = idx;
        for (std::size_t k = 0; k < N_; ++k) {
          u[k] = levels[r % 3];
          r /= 3;
        }
        seeds.push_back(std::move(u));
      }
    }
    return seeds;
  }

  const Evaluation &consider(std::span<const double> u)
  {
    const auto &e = ev_.evaluate(u, true);
    if (e.min_slack >= -opt_.feas_tol && e.cost.total < incumbent_.cost) {
      incumbent_.cost = e.cost.total;
      incumbent_.u = ev_.effective_inputs();
    }
    return e;
  }

  double merit(std::span<const double> u, double tau)
  {
    const auto &e = consider(u);
    double f = e.cost.total + opt_.clip_penalty * e.clip_sq;
    if (ev_.d2() > 0.0) {
      if (e.min_slack <= 0.0) {
        return kInf;
      }
      f -= tau * e.log_barrier;
    }
    return f;
  }

  double violation(std::span<const double> u)
  {
    const auto &e = consider(u);
    double v = 0.0;
    const double target = ev_.d2() * (1.0 + 1e-3);
    // Recompute per-step shortfall from the stored trajectory.
    for (const auto &s : ev_.trajectory()) {
      const double r2 = sq(s.x_veh - p_.geometry.conflict_x) + sq(s.y_ped - p_.geometry.conflict_y);
      v += sq(std::max(0.0, target - r2));
    }
    return v + opt_.clip_penalty * e.clip_sq;
  }

  template<class F>
  void gradient(std::span<const double> u, F &&f, double fu, std::vector<double> &g)
  {
    std::vector<double> w(u.begin(), u.end());
    const double h = opt_.fd_step;
    for (std::size_t k = 0; k < N_; ++k) {
      const double uk = w[k];
      w[k] = uk + h;
      const double fp = f(w);
      w[k] = uk - h;
      const double fm = f(w);
      w[k] = uk;
      if (std::isfinite(fp) && std::isfinite(fm)) {
        g[k] = (fp - fm) / (2.0 * h);
      } else if (std::isfinite(fp)) {
        g[k] = (fp - fu) / h;
      } else if (std::isfinite(fm)) {
        g[k] = (fu - fm) / h;
      } else {
        g[k] = 0.0;
      }
    }
  }

  std::vector<double> project(std::vector<double> u) const
  {
    for (auto &x : u) {
      x = std::clamp(x, p_.params.a_min, p_.params.a_max);
    }
    return u;
  }

  // Projected gradient with Barzilai-Borwein steps and Armijo backtracking.
  // Returns true when the iteration cap was reached before convergence.
  template<class F>
  bool descend(std::vector<double> &u, F &&f, int max_iters, double stop_value = -kInf)
  {
    double fu = f(u);
    if (!std::isfinite(fu)) {
      return false;
    }
    std::vector<double> g(N_), g_new(N_);
    gradient(u, f, fu, g);
    double gmax = 0.0;
    for (double gi : g) {
      gmax = std::max(gmax, std::abs(gi));
    }
    double alpha = gmax > 0.0 ? 0.5 / gmax : 1.0;
    for (int it = 0; it < max_iters; ++it) {
      ++iterations_;
      std::vector<double> trial;
      double f_trial = kInf;
      double decrease = 0.0;
      bool accepted = false;
      for (int bt = 0; bt < 30; ++bt) {
        std::vector<double> cand(N_);
        for (std::size_t k = 0; k < N_; ++k) {
          cand[k] = u[k] - alpha * g[k];
        }
        trial = project(std::move(cand));
        decrease = 0.0;
        for (std::size_t k = 0; k < N_; ++k) {
          decrease += g[k] * (u[k] - trial[k]);
        }
        if (decrease <= 0.0) {
          break;
        }
        f_trial = f(trial);
        if (std::isfinite(f_trial) && f_trial <= fu - 1e-4 * decrease) {
          accepted = true;
          break;
        }
        alpha *= 0.25;
      }
      history_.push_back(incumbent_.cost);
      if (!accepted) {
        return false;  // stationary to working precision
      }
      gradient(trial, f, f_trial, g_new);
      double ss = 0.0, sy = 0.0, step_max = 0.0;
      for (std::size_t k = 0; k < N_; ++k) {
        const double s = trial[k] - u[k];
        const double y = g_new[k] - g[k];
        ss += s * s;
        sy += s * y;
        step_max = std::max(step_max, std::abs(s));
      }
      const double df = fu - f_trial;
      u = std::move(trial);
      g.swap(g_new);
      fu = f_trial;
      if (fu <= stop_value) {
        return false;
      }
      if (step_max < 1e-7 || df <= 1e-11 * (1.0 + std::abs(fu))) {
        return false;
      }
      alpha = sy > 1e-300 ? std::clamp(ss / sy, 1e-8, 1e4) : std::min(alpha * 4.0, 1e4);
    }
    return true;
  }

  bool barrier_descent(std::vector<double> u)
  {
    const auto &e0 = ev_.evaluate(u, true);
    if (ev_.d2() > 0.0 && e0.min_slack <= 0.0) {
      // On the boundary: nudge inward by braking a little harder, or give up on this start.
      return false;
    }
    double tau = 1e-3 * (1.0 + std::abs(e0.cost.total));
    const int stages = ev_.d2() > 0.0 ? opt_.stages : 1;
    bool capped = false;
    for (int s = 0; s < stages; ++s) {
      auto f = [this, tau](std::span<const double> x) { return merit(x, tau); };
      capped = descend(u, f, opt_.max_iters_per_stage);
      tau *= 0.01;
    }
    return capped;
  }

  std::optional<std::vector<double>> restore_feasibility(const std::vector<std::vector<double>> &seeds)
  {
    auto f = [this](std::span<const double> x) { return violation(x); };
    // Full braking first: it keeps the vehicle as far back as the horizon allows.
    std::vector<std::vector<double>> starts{constant(p_.params.a_min)};
    starts.push_back(seeds.front());
    for (auto u : starts) {
      descend(u, f, 40, 0.0);
      const auto &e = ev_.evaluate(u, true);
      if (e.min_slack > 0.0) {
        return ev_.effective_inputs();
      }
    }
    return std::nullopt;
  }

  MpcSolution finish(SolveStatus status, const std::vector<double> &u)
  {
    MpcSolution sol;
    const auto &e = ev_.evaluate(u, true);
    sol.u = ev_.effective_inputs();
    sol.predicted = ev_.trajectory();
    sol.z_ped = ev_.realized_z();
    sol.cost = e.cost;
    sol.iterations = iterations_;
    sol.constraint_violation = std::max({0.0, -e.min_slack, e.speed_violation});
    sol.status = status;
    sol.cost_history = std::move(history_);
    if (sol.cost_history.empty()) {
      sol.cost_history.push_back(e.cost.total);
    }
    return sol;
  }

  const MpcProblem &p_;
  SolverOptions opt_;
  Evaluator ev_;
  std::size_t N_;
  Incumbent incumbent_;
  int iterations_{0};
  std::vector<double> history_;
};

}  // namespace

SafetyTerms apply_intention(const ControllerParams &params, double intention, ZoneLabel zone)
{
  if (zone == ZoneLabel::Crossing) {
    return {params.w_safe, params.d_min};
  }
  return {params.w_safe * intention, params.d_min * intention};
}

CostBreakdown eval_cost(std::span<const double> u_s, const MpcProblem &problem)
{
  if (u_s.size() != static_cast<std::size_t>(problem.params.N)) {
    throw std::invalid_argument("eval_cost: input sequence length must equal N");
  }
  Evaluator ev(problem);
  if (ev.frozen()) {
    auto z = problem.frozen_z;
    if (z.size() != ev.horizon()) {
      z = rollout_with_ped_model(problem.x0, u_s, problem.geometry, PedModelParams::from(problem.params),
                                 problem.params.dt)
              .z_ped;
    }
    ev.freeze(std::move(z));
  }
  return ev.evaluate(u_s, false).cost;
}

std::vector<JointState> predicted_trajectory(std::span<const double> u_s, const MpcProblem &problem)
{
  if (problem.params.prediction_mode == PredictionMode::FrozenZ &&
      problem.frozen_z.size() == static_cast<std::size_t>(problem.params.N)) {
    return predict(problem.x0, u_s, problem.frozen_z, build_batch(problem.params.N, problem.params.dt));
  }
  return rollout_with_ped_model(problem.x0, u_s, problem.geometry, PedModelParams::from(problem.params),
                                problem.params.dt)
      .trajectory;
}

std::string_view to_string(SolveStatus s)
{
  switch (s) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::MaxIters: return "max_iters";
    case SolveStatus::Infeasible: return "infeasible";
  }
  return "?";
}

MpcSolution solve(const MpcProblem &problem, const std::optional<std::vector<double>> &warm_start,
                  const SolverOptions &options)
{
  problem.params.validate();
  Solver solver(problem, options);
  return solver.run(warm_start);
}

double IntentionTracker::update(const JointState &state, double intention_raw, const ScenarioGeometry &geometry,
                                const ControllerParams &params)
{
  const ZoneLabel zone = classify_zone(state.y_ped, geometry);
  const bool in_bands = zone == ZoneLabel::Safe || zone == ZoneLabel::Near || zone == ZoneLabel::Crossing;
  if (!onset_ && in_bands && veh_gap(state, geometry) <= geometry.sensing_range) {
    onset_ = state.t;
  }
  const bool standing = std::abs(state.v_ped) < params.standstill_speed;
  discounting_ = onset_ && standing && (zone == ZoneLabel::Safe || zone == ZoneLabel::Near);
  const double raw = std::clamp(intention_raw, 0.0, 1.0);
  if (discounting_) {
    return discount_intention({raw, *onset_}, params.K_d, std::max(state.t, *onset_));
  }
  return raw;
}

IampdmController::IampdmController(ControllerParams params, ScenarioGeometry geometry, SolverOptions options)
    : params_(params), geometry_(geometry), options_(options)
{
  params_.validate();
  geometry_.validate();
}

void IampdmController::reset()
{
  tracker_.reset();
  intention_eff_ = 0.0;
  warm_.reset();
  z_prev_.clear();
  last_.reset();
  diag_ = {};
}

double IampdmController::observe(const JointState &state, double intention_raw)
{
  intention_eff_ = tracker_.update(state, intention_raw, geometry_, params_);
  return intention_eff_;
}

double IampdmController::decide(const JointState &state, double intention_raw)
{
  observe(state, intention_raw);
  diag_ = {};
  diag_.intention_effective = intention_eff_;

  if (is_ped_passed(state, geometry_) || is_veh_passed(state, geometry_)) {
    warm_.reset();
    z_prev_.clear();
    return velocity_tracking(state, params_);
  }

  MpcProblem problem{state, params_, geometry_, intention_eff_, {}};
  if (params_.prediction_mode == PredictionMode::FrozenZ && z_prev_.size() == static_cast<std::size_t>(params_.N)) {
    problem.frozen_z.assign(z_prev_.begin() + 1, z_prev_.end());
    problem.frozen_z.push_back(z_prev_.back());
  }
  MpcSolution sol = solve(problem, warm_, options_);

  diag_.used_mpc = true;
  diag_.safety = problem.safety();
  diag_.cost = sol.cost;
  diag_.iterations = sol.iterations;
  diag_.constraint_violation = sol.constraint_violation;
  diag_.status = sol.status;

  double u0 = params_.a_min;
  if (sol.status == SolveStatus::Infeasible) {
    warm_.reset();
    z_prev_.clear();
  } else {
    u0 = sol.u.front();
    std::vector<double> shifted(sol.u.begin() + 1, sol.u.end());
    shifted.push_back(sol.u.back());
    warm_ = std::move(shifted);
    z_prev_ = sol.z_ped;
  }
  last_ = std::move(sol);
  return std::clamp(u0, params_.a_min, params_.a_max);
}

}  // namespace pedsim
