// Independent reference implementations used as test oracles. They are
// written from the defining formulas with plain loops and deliberately share
// no code with the library.
#ifndef PEDSIM_TESTS_ORACLES_HPP_
#define PEDSIM_TESTS_ORACLES_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <vector>

namespace oracle {

/// Logistic written through tanh: 1 / (1 + e^{-(x - c)}) = (1 + tanh((x - c) / 2)) / 2.
inline double sigmoid(double ttc, double c) { return 0.5 * (1.0 + std::tanh(0.5 * (ttc - c))); }

struct State
{
  double x{0}, v{0}, y{0}, vp{0};
};

/// Joint dynamics written out row by row.
inline State step(const State &s, double u, double z, double dt)
{
  return {s.x + dt * s.v + 0.5 * dt * dt * u, s.v + dt * u, s.y + dt * s.vp, z};
}

/// Dense 4x4 product, row-major.
using Mat4 = std::array<std::array<double, 4>, 4>;

inline Mat4 matmul(const Mat4 &a, const Mat4 &b)
{
  Mat4 r{};
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      for (int k = 0; k < 4; ++k) r[i][j] += a[i][k] * b[k][j];
  return r;
}

inline Mat4 system_matrix(double dt)
{
  return Mat4{{{1, dt, 0, 0}, {0, 1, 0, 0}, {0, 0, 1, dt}, {0, 0, 0, 0}}};
}

inline Mat4 matpow(const Mat4 &a, int n)
{
  Mat4 r{{{1, 0, 0, 0}, {0, 1, 0, 0}, {0, 0, 1, 0}, {0, 0, 0, 1}}};
  for (int i = 0; i < n; ++i) r = matmul(r, a);
  return r;
}

/// Pedestrian-model quantities for the origin-centred frame with
/// x_ped_path = y_veh_lane = 0.
struct PedModel
{
  double c{2.0};
  double v_ref{1.4};
  double v_eps{0.05};

  double ttc(const State &s) const { return (0.0 - s.x) / std::max(s.v, v_eps) - (0.0 - s.y) / v_ref; }
  double next_speed(const State &s) const { return sigmoid(ttc(s), c) * v_ref; }
};

struct MpcWeights
{
  double w_com{1.0}, w_ref_veh{1.0}, w_ref_ped{2.0}, w_safe{400.0};
  double d_min{4.0};
  double v_veh_ref{8.33}, v_ped_ref{1.4};
  double v_max{12.0}, a_min{-4.0}, a_max{2.0};
  double eps_safe{1e-6};
  double dt{0.2};
};

struct CostResult
{
  double total{0.0};
  bool feasible{true};
  double worst{0.0};  // largest constraint residual (positive means violated)
};

/// J_com + J_ref (deviation form) + J_safe of a self-consistent rollout, plus
/// feasibility of the distance, speed and input bounds at every predicted step.
/// w_safe and d_min are the already intention-scaled values.
inline CostResult mpc_cost(const State &x0, const std::vector<double> &u, const MpcWeights &w, const PedModel &ped,
                           double tol = 1e-9)
{
  CostResult r;
  State s = x0;
  double sum_r2 = 0.0;
  for (double uk : u) {
    const double z = ped.next_speed(s);
    s = step(s, uk, z, w.dt);
    r.total += w.w_com * uk * uk;
    r.total += w.w_ref_veh * (s.v - w.v_veh_ref) * (s.v - w.v_veh_ref) + w.w_ref_ped * (s.vp - w.v_ped_ref) * (s.vp - w.v_ped_ref);
    const double r2 = s.x * s.x + s.y * s.y;
    sum_r2 += r2;
    const double dist_res = w.d_min * w.d_min - r2;
    const double v_res = std::max(-s.v, s.v - w.v_max);
    const double u_res = std::max(w.a_min - uk, uk - w.a_max);
    r.worst = std::max({r.worst, dist_res, v_res, u_res});
  }
  r.total += w.w_safe > 0.0 ? w.w_safe / std::max(sum_r2, w.eps_safe) : 0.0;
  r.feasible = r.worst <= tol;
  return r;
}

/// Midrank of every value by counting: 1 + #smaller + (#equal - 1) / 2.
inline std::vector<double> naive_ranks(const std::vector<double> &pooled)
{
  std::vector<double> r(pooled.size());
  for (std::size_t i = 0; i < pooled.size(); ++i) {
    double less = 0, equal = 0;
    for (double v : pooled) {
      if (v < pooled[i]) ++less;
      if (v == pooled[i]) ++equal;
    }
    r[i] = 1.0 + less + (equal - 1.0) / 2.0;
  }
  return r;
}

/// Kruskal-Wallis H with the tie correction 1 - sum(t^3 - t) / (n^3 - n).
inline double kruskal_h(const std::vector<std::vector<double>> &groups)
{
  std::vector<double> pooled;
  for (const auto &g : groups) pooled.insert(pooled.end(), g.begin(), g.end());
  const auto ranks = naive_ranks(pooled);
  const double n = static_cast<double>(pooled.size());
  double h = 0.0;
  std::size_t off = 0;
  for (const auto &g : groups) {
    double rs = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) rs += ranks[off + i];
    off += g.size();
    h += rs * rs / static_cast<double>(g.size());
  }
  h = 12.0 / (n * (n + 1.0)) * h - 3.0 * (n + 1.0);
  // Tie groups, counted by scanning distinct values.
  std::vector<double> distinct = pooled;
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  double ties = 0.0;
  for (double v : distinct) {
    const double t = static_cast<double>(std::count(pooled.begin(), pooled.end(), v));
    ties += t * t * t - t;
  }
  const double corr = 1.0 - ties / (n * n * n - n);
  return corr > 0.0 ? h / corr : 0.0;
}

/// U of sample a: number of pairs (a_i, b_j) with a_i > b_j, plus half the ties.
inline double mann_whitney_u(const std::vector<double> &a, const std::vector<double> &b)
{
  double u = 0.0;
  for (double x : a)
    for (double y : b) u += x > y ? 1.0 : (x == y ? 0.5 : 0.0);
  return u;
}

/// Exact two-sided p by enumerating every split of the pooled ranks into
/// groups of the original sizes: 2 min(P(U <= u), P(U >= u)), capped at 1.
inline double mann_whitney_exact_p(const std::vector<double> &a, const std::vector<double> &b)
{
  const std::size_t na = a.size(), n = a.size() + b.size();
  std::vector<double> pooled(a);
  pooled.insert(pooled.end(), b.begin(), b.end());
  const double u_obs = mann_whitney_u(a, b);
  std::size_t total = 0, le = 0, ge = 0;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
    if (static_cast<std::size_t>(__builtin_popcountll(mask)) != na) continue;
    std::vector<double> ga, gb;
    for (std::size_t i = 0; i < n; ++i) ((mask >> i) & 1 ? ga : gb).push_back(pooled[i]);
    const double u = mann_whitney_u(ga, gb);
    ++total;
    if (u <= u_obs + 1e-12) ++le;
    if (u >= u_obs - 1e-12) ++ge;
  }
  const double p = 2.0 * static_cast<double>(std::min(le, ge)) / static_cast<double>(total);
  return std::min(1.0, p);
}

/// Textbook quartile by linear interpolation at position (n - 1) q.
inline double quartile(std::vector<double> x, double q)
{
  std::sort(x.begin(), x.end());
  const double pos = q * static_cast<double>(x.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, x.size() - 1);
  return x[lo] + (pos - static_cast<double>(lo)) * (x[hi] - x[lo]);
}

}  // namespace oracle

#endif  // PEDSIM_TESTS_ORACLES_HPP_
