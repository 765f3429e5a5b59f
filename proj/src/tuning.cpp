#include "pedsim/tuning.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

#include "pedsim/metrics.hpp"

namespace pedsim {

namespace {

template<class P>
auto theta_slot(P &p, std::string_view name) -> decltype(&p.w_safe)
{
  if (name == "w_safe") return &p.w_safe;
  if (name == "w_com") return &p.w_com;
  if (name == "w_ref_ped") return &p.w_ref_ped;
  if (name == "w_ref_veh") return &p.w_ref_veh;
  if (name == "d_min") return &p.d_min;
  if (name == "K_d") return &p.K_d;
  if (name == "v_veh_max") return &p.v_veh_max;
  if (name == "a_min") return &p.a_min;
  if (name == "a_max") return &p.a_max;
  throw std::invalid_argument("tuning: unknown parameter '" + std::string(name) + "'");
}

}  // namespace

double get_theta(const ControllerParams &p, std::string_view name)
{
  return *theta_slot(p, name);
}

void set_theta(ControllerParams &p, std::string_view name, double value) { *theta_slot(p, name) = value; }

void TuningConfig::validate() const
{
  for (double k : {k1, k2, k3, k4}) {
    if (!std::isfinite(k)) {
      throw std::invalid_argument("tuning.k: weights must be finite");
    }
  }
  if (budget < 1) {
    throw std::invalid_argument("tuning.budget: must be >= 1");
  }
  if (seeds.empty()) {
    throw std::invalid_argument("tuning.seeds: must not be empty");
  }
  if (scenarios.empty()) {
    throw std::invalid_argument("tuning.scenarios: must not be empty");
  }
  for (const auto &[name, b] : theta_bounds) {
    ControllerParams probe;
    (void)theta_slot(probe, name);
    if (!std::isfinite(b.first) || !std::isfinite(b.second) || !(b.first < b.second)) {
      throw std::invalid_argument("tuning.theta_bounds." + name + ": need finite lo < hi");
    }
  }
  for (const auto &name : free_params) {
    if (!theta_bounds.contains(name)) {
      throw std::invalid_argument("tuning.free_params: '" + name + "' has no entry in theta_bounds");
    }
  }
}

double j_glob_integral(const EpisodeTrace &trace, const TuningConfig &cfg, const ScenarioGeometry &geometry,
                       const ControllerParams &params)
{
  if (trace.records.empty()) {
    return 0.0;
  }
  const PedModelParams ped = PedModelParams::from(params);
  const double t0 = trace.records.front().state.t;
  auto integrand = [&](const TraceRecord &r) {
    double f = cfg.k1 * (r.state.t - t0) + cfg.k2 * r.u_cmd * r.u_cmd;
    if (cfg.k4 != 0.0) {
      const double ttc = ttc_mpc(r.state, geometry, ped);
      const double inv = ttc > 0.0 ? std::min(1.0 / ttc, 1.0 / kKappa) : 0.0;
      f += cfg.k4 * inv;
    }
    return f;
  };
  double sum = 0.0;
  double f_prev = integrand(trace.records.front());
  for (std::size_t i = 1; i < trace.records.size(); ++i) {
    const auto &r = trace.records[i];
    if (r.state.t > trace.T_end + 1e-12) {
      break;
    }
    const double f = integrand(r);
    sum += 0.5 * (f_prev + f) * (r.state.t - trace.records[i - 1].state.t);
    f_prev = f;
  }
  return sum;
}

double j_glob(const EpisodeTrace &trace, const TuningConfig &cfg, const ScenarioGeometry &geometry,
              const ControllerParams &params)
{
  double d_sep = std::numeric_limits<double>::infinity();
  for (const auto &r : trace.records) {
    d_sep = std::min(d_sep, std::hypot(r.state.x_veh - geometry.conflict_x, r.state.y_ped - geometry.conflict_y));
  }
  if (!std::isfinite(d_sep)) {
    d_sep = 0.0;
  }
  return j_glob_integral(trace, cfg, geometry, params) - cfg.k3 * std::abs(d_sep);
}

TuneResult minimize_bounded(const Objective &f, std::vector<double> x0, const std::vector<double> &lo,
                            const std::vector<double> &hi, int budget, std::size_t population, std::uint64_t seed)
{
  const std::size_t n = x0.size();
  if (lo.size() != n || hi.size() != n) {
    throw std::invalid_argument("minimize_bounded: bounds must match the dimension of x0");
  }
  if (budget < 1) {
    throw std::invalid_argument("minimize_bounded: budget must be >= 1");
  }
  auto clamp = [&](std::vector<double> x) {
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = std::clamp(x[i], lo[i], hi[i]);
    }
    return x;
  };

  TuneResult res;
  res.best_value = std::numeric_limits<double>::infinity();
  auto eval = [&](const std::vector<double> &x) {
    const double v = f(x);
    const double value = std::isfinite(v) ? v : std::numeric_limits<double>::max();
    res.log.push_back({x, value});
    if (value < res.best_value) {
      res.best_value = value;
      res.best = x;
    }
    res.best_so_far.push_back(res.best_value);
    return value;
  };
  auto left = [&]() { return budget - static_cast<int>(res.log.size()); };

  x0 = clamp(std::move(x0));
  eval(x0);
  if (n == 0) {
    return res;
  }

  std::mt19937_64 rng(seed);
  for (std::size_t k = 0; k < population && left() > 0; ++k) {
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = std::uniform_real_distribution<double>(lo[i], hi[i])(rng);
    }
    eval(x);
  }

  double scale = 0.25;
  while (left() > 0) {
    // Fresh simplex around the incumbent.
    std::vector<std::vector<double>> simplex{res.best};
    std::vector<double> fs{res.best_value};
    for (std::size_t i = 0; i < n && left() > 0; ++i) {
      std::vector<double> x = res.best;
      const double step = scale * (hi[i] - lo[i]);
      x[i] = x[i] + step <= hi[i] ? x[i] + step : x[i] - step;
      x = clamp(std::move(x));
      simplex.push_back(x);
      fs.push_back(eval(x));
    }
    if (simplex.size() < n + 1) {
      break;
    }

    while (left() > 0) {
      std::vector<std::size_t> idx(n + 1);
      std::iota(idx.begin(), idx.end(), 0);
      std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return fs[a] < fs[b]; });
      const std::size_t ib = idx.front(), iw = idx.back(), isw = idx[n - 1];

      double diam = 0.0;
      for (std::size_t k = 0; k <= n; ++k) {
        for (std::size_t i = 0; i < n; ++i) {
          diam = std::max(diam, std::abs(simplex[k][i] - simplex[ib][i]) / (hi[i] - lo[i]));
        }
      }
      if (diam < 1e-10 || fs[iw] - fs[ib] <= 1e-15 * (1.0 + std::abs(fs[ib]))) {
        break;
      }

      std::vector<double> c(n, 0.0);
      for (std::size_t k = 0; k <= n; ++k) {
        if (k == iw) continue;
        for (std::size_t i = 0; i < n; ++i) c[i] += simplex[k][i] / static_cast<double>(n);
      }
      auto along = [&](double t) {
        std::vector<double> x(n);
        for (std::size_t i = 0; i < n; ++i) x[i] = c[i] + t * (simplex[iw][i] - c[i]);
        return clamp(std::move(x));
      };

      const auto xr = along(-1.0);
      const double fr = eval(xr);
      if (fr < fs[ib]) {
        if (left() <= 0) {
          simplex[iw] = xr, fs[iw] = fr;
          break;
        }
        const auto xe = along(-2.0);
        const double fe = eval(xe);
        if (fe < fr) {
          simplex[iw] = xe, fs[iw] = fe;
        } else {
          simplex[iw] = xr, fs[iw] = fr;
        }
      } else if (fr < fs[isw]) {
        simplex[iw] = xr, fs[iw] = fr;
      } else {
        if (left() <= 0) break;
        const bool outside = fr < fs[iw];
        const auto xc = along(outside ? -0.5 : 0.5);
        const double fc = eval(xc);
        if (fc < (outside ? fr : fs[iw])) {
          simplex[iw] = xc, fs[iw] = fc;
        } else {
          // Shrink toward the best vertex.
          for (std::size_t k = 0; k <= n && left() > 0; ++k) {
            if (k == ib) continue;
            for (std::size_t i = 0; i < n; ++i) {
              simplex[k][i] = simplex[ib][i] + 0.5 * (simplex[k][i] - simplex[ib][i]);
            }
            fs[k] = eval(simplex[k]);
          }
        }
      }
    }
    scale = std::max(scale * 0.5, 1e-4);
  }
  return res;
}

ControllerParams apply_theta(ControllerParams p, const TuningConfig &cfg, const std::vector<double> &x)
{
  for (std::size_t i = 0; i < cfg.free_params.size() && i < x.size(); ++i) {
    set_theta(p, cfg.free_params[i], x[i]);
  }
  return p;
}

Objective make_batch_objective(const BatchSetup &base, const TuningConfig &cfg, unsigned threads)
{
  const auto jobs = make_grid(cfg.scenarios, {ControllerKind::Iampdm}, cfg.seeds);
  return [base, cfg, jobs, threads](const std::vector<double> &x) {
    BatchSetup setup = base;
    setup.params = apply_theta(base.params, cfg, x);
    try {
      setup.params.validate();
    } catch (const std::invalid_argument &) {
      return std::numeric_limits<double>::infinity();
    }
    const auto traces = run_batch(jobs, setup, threads);
    double sum = 0.0;
    for (const auto &t : traces) {
      if (!t.error.empty()) {
        return std::numeric_limits<double>::infinity();
      }
      sum += j_glob(t, cfg, setup.geometry, setup.params);
    }
    return sum / static_cast<double>(traces.size());
  };
}

TuneResult tune(const BatchSetup &base, const TuningConfig &cfg, unsigned threads)
{
  cfg.validate();
  std::vector<double> x0, lo, hi;
  for (const auto &name : cfg.free_params) {
    const auto [l, h] = cfg.theta_bounds.at(name);
    x0.push_back(get_theta(base.params, name));
    lo.push_back(l);
    hi.push_back(h);
  }
  return minimize_bounded(make_batch_objective(base, cfg, threads), x0, lo, hi, cfg.budget, cfg.population,
                          cfg.rng_seed);
}

namespace {

nlohmann::json side(const TuningConfig &cfg, const TuneResult &r)
{
  nlohmann::json theta = nlohmann::json::object();
  for (std::size_t i = 0; i < cfg.free_params.size() && i < r.best.size(); ++i) {
    theta[cfg.free_params[i]] = r.best[i];
  }
  return {{"k", {cfg.k1, cfg.k2, cfg.k3, cfg.k4}},
          {"theta_star", theta},
          {"objective", r.best_value},
          {"evaluations", r.log.size()}};
}

}  // namespace

ExpertStep expert_loop_step(const BatchSetup &base, const TuningConfig &previous, const TuneResult &previous_result,
                            const std::array<double, 4> &k_values, unsigned threads)
{
  ExpertStep step;
  step.config = previous;
  step.config.k1 = k_values[0];
  step.config.k2 = k_values[1];
  step.config.k3 = k_values[2];
  step.config.k4 = k_values[3];
  step.result = tune(base, step.config, threads);
  step.report = {{"previous", side(previous, previous_result)}, {"current", side(step.config, step.result)}};

  std::ostringstream os;
  auto row = [&os](const std::string &name, double prev, double cur) {
    os << std::left << std::setw(12) << name << std::right << std::setw(14) << prev << std::setw(14) << cur << '\n';
  };
  os << std::left << std::setw(12) << "parameter" << std::right << std::setw(14) << "previous" << std::setw(14)
     << "current" << '\n';
  const double kp[] = {previous.k1, previous.k2, previous.k3, previous.k4};
  for (int i = 0; i < 4; ++i) {
    row("k" + std::to_string(i + 1), kp[i], k_values[i]);
  }
  for (std::size_t i = 0; i < step.config.free_params.size(); ++i) {
    row(step.config.free_params[i], i < previous_result.best.size() ? previous_result.best[i] : std::nan(""),
        step.result.best[i]);
  }
  row("objective", previous_result.best_value, step.result.best_value);
  step.text = os.str();
  return step;
}

}  // namespace pedsim
