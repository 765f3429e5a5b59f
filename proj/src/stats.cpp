#include "pedsim/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <boost/math/special_functions/gamma.hpp>

namespace pedsim {

double quantile_linear(std::vector<double> sample, double q)
{
  if (sample.empty()) {
    throw std::invalid_argument("quantile_linear: empty sample");
  }
  std::sort(sample.begin(), sample.end());
  const double pos = (static_cast<double>(sample.size()) - 1.0) * std::clamp(q, 0.0, 1.0);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sample.size() - 1);
  return sample[lo] + (pos - static_cast<double>(lo)) * (sample[hi] - sample[lo]);
}

double mean(std::span<const double> x)
{
  if (x.empty()) {
    return 0.0;
  }
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double stddev(std::span<const double> x)
{
  if (x.size() < 2) {
    return 0.0;
  }
  const double m = mean(x);
  double ss = 0.0;
  for (double v : x) {
    ss += (v - m) * (v - m);
  }
  return std::sqrt(ss / static_cast<double>(x.size() - 1));
}

IqrResult iqr_filter(std::span<const double> sample)
{
  IqrResult r;
  if (sample.size() < 4) {
    r.values.assign(sample.begin(), sample.end());
    r.undersized = true;
    return r;
  }
  std::vector<double> v(sample.begin(), sample.end());
  const double q1 = quantile_linear(v, 0.25);
  const double q3 = quantile_linear(v, 0.75);
  const double iqr = q3 - q1;
  r.lower = q1 - 1.5 * iqr;
  r.upper = q3 + 1.5 * iqr;
  for (double x : sample) {
    if (x >= r.lower && x <= r.upper) {
      r.values.push_back(x);
    } else {
      ++r.removed;
    }
  }
  return r;
}

std::vector<double> midranks(std::span<const double> pooled)
{
  const std::size_t n = pooled.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return pooled[a] < pooled[b]; });
  std::vector<double> ranks(n);
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && pooled[order[j + 1]] == pooled[order[i]]) {
      ++j;
    }
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) {
      ranks[order[k]] = r;
    }
    i = j + 1;
  }
  return ranks;
}

namespace {

// Sum of t^3 - t over tie groups of the pooled sample.
double tie_term(std::vector<double> pooled)
{
  std::sort(pooled.begin(), pooled.end());
  double sum = 0.0;
  for (std::size_t i = 0; i < pooled.size();) {
    std::size_t j = i;
    while (j + 1 < pooled.size() && pooled[j + 1] == pooled[i]) {
      ++j;
    }
    const double t = static_cast<double>(j - i + 1);
    sum += t * t * t - t;
    i = j + 1;
  }
  return sum;
}

}  // namespace

KruskalResult kruskal_wallis(const std::vector<std::vector<double>> &groups)
{
  if (groups.size() < 2) {
    throw std::invalid_argument("kruskal_wallis: need at least two groups");
  }
  std::vector<double> pooled;
  for (const auto &g : groups) {
    if (g.empty()) {
      throw std::invalid_argument("kruskal_wallis: empty group");
    }
    pooled.insert(pooled.end(), g.begin(), g.end());
  }
  const auto ranks = midranks(pooled);
  const double n = static_cast<double>(pooled.size());

  double sum = 0.0;
  std::size_t offset = 0;
  for (const auto &g : groups) {
    double r = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      r += ranks[offset + i];
    }
    offset += g.size();
    sum += r * r / static_cast<double>(g.size());
  }
  double H = 12.0 / (n * (n + 1.0)) * sum - 3.0 * (n + 1.0);
  const double correction = 1.0 - tie_term(pooled) / (n * n * n - n);

  KruskalResult res;
  res.df = static_cast<int>(groups.size()) - 1;
  if (correction <= 0.0) {
    // Every value identical: no evidence of any difference.
    res.H = 0.0;
    res.p = 1.0;
    return res;
  }
  H /= correction;
  res.H = std::max(H, 0.0);
  res.p = boost::math::gamma_q(0.5 * res.df, 0.5 * res.H);
  res.significant = res.df == 2 && res.H >= kKruskalCritical;
  return res;
}

namespace {

// P(U <= u) under the null for sample sizes m, n without ties, by counting
// arrangements: f(m, n, u) = f(m - 1, n, u - n) + f(m, n - 1, u).
double exact_cdf(std::size_t m, std::size_t n, double u)
{
  const std::size_t umax = m * n;
  // table[i][j] holds the count vector for sizes (i, j)
  std::vector<std::vector<std::vector<double>>> f(m + 1, std::vector<std::vector<double>>(n + 1));
  for (std::size_t i = 0; i <= m; ++i) {
    for (std::size_t j = 0; j <= n; ++j) {
      auto &cur = f[i][j];
      cur.assign(i * j + 1, 0.0);
      if (i == 0 || j == 0) {
        cur[0] = 1.0;
        continue;
      }
      const auto &a = f[i - 1][j];  // largest value belongs to the first sample: it beats all j
      const auto &b = f[i][j - 1];
      for (std::size_t k = 0; k < a.size(); ++k) {
        cur[k + j] += a[k];
      }
      for (std::size_t k = 0; k < b.size(); ++k) {
        cur[k] += b[k];
      }
    }
  }
  const auto &dist = f[m][n];
  double total = 0.0, below = 0.0;
  for (std::size_t k = 0; k <= umax; ++k) {
    total += dist[k];
    if (static_cast<double>(k) <= u + 1e-9) {
      below += dist[k];
    }
  }
  return below / total;
}

}  // namespace

MannWhitneyResult mann_whitney(std::span<const double> a, std::span<const double> b)
{
  if (a.empty() || b.empty()) {
    throw std::invalid_argument("mann_whitney: both samples must be nonempty");
  }
  std::vector<double> pooled(a.begin(), a.end());
  pooled.insert(pooled.end(), b.begin(), b.end());
  const auto ranks = midranks(pooled);
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  double ra = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ra += ranks[i];
  }

  MannWhitneyResult r;
  r.U_a = ra - na * (na + 1.0) / 2.0;
  r.U = std::min(r.U_a, na * nb - r.U_a);

  const double ties = tie_term(pooled);
  if (std::min(a.size(), b.size()) <= 8 && ties == 0.0) {
    r.exact = true;
    r.p = std::min(1.0, 2.0 * exact_cdf(a.size(), b.size(), r.U));
    return r;
  }
  const double n = na + nb;
  const double var = na * nb / 12.0 * ((n + 1.0) - ties / (n * (n - 1.0)));
  if (var <= 0.0) {
    r.p = 1.0;
    return r;
  }
  const double z = std::max(0.0, std::abs(r.U_a - na * nb / 2.0) - 0.5) / std::sqrt(var);
  r.p = std::min(1.0, std::erfc(z / std::sqrt(2.0)));
  return r;
}

}  // namespace pedsim
