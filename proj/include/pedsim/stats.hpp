#ifndef PEDSIM_STATS_HPP_
#define PEDSIM_STATS_HPP_

#include <span>
#include <string>
#include <vector>

namespace pedsim {

/// Chi-square critical value for df = 2 at alpha = 0.01.
inline constexpr double kKruskalCritical = 9.21;

/// Quantile with linear interpolation between order statistics
/// (position (n - 1) q in the sorted sample).
double quantile_linear(std::vector<double> sample, double q);

double mean(std::span<const double> x);
/// Sample standard deviation (n - 1 denominator); 0 for fewer than two values.
double stddev(std::span<const double> x);

struct IqrResult
{
  std::vector<double> values;  // kept values, original order
  std::size_t removed{0};
  bool undersized{false};      // fewer than 4 values: returned unchanged
  double lower{0.0};
  double upper{0.0};
};

/// Drops values outside [Q1 - 1.5 IQR, Q3 + 1.5 IQR] (closed band).
IqrResult iqr_filter(std::span<const double> sample);

/// Midranks (1-based) of the pooled values.
std::vector<double> midranks(std::span<const double> pooled);

struct KruskalResult
{
  double H{0.0};
  int df{0};
  double p{1.0};           // chi-square upper tail with df degrees of freedom
  bool significant{false}; // H >= kKruskalCritical (df = 2 only)
};

/// Rank-based H with midranks and tie correction. Throws std::invalid_argument
/// when fewer than two groups are given or a group is empty.
KruskalResult kruskal_wallis(const std::vector<std::vector<double>> &groups);

struct MannWhitneyResult
{
  double U{0.0};   // min(U_a, U_b)
  double U_a{0.0}; // statistic of the first sample
  double p{1.0};   // two-sided
  bool exact{false};
};

/// Two-sided Mann-Whitney U. Exact null distribution when min(n_a, n_b) <= 8 and
/// there are no ties; otherwise normal approximation with tie and continuity correction.
MannWhitneyResult mann_whitney(std::span<const double> a, std::span<const double> b);

}  // namespace pedsim

#endif  // PEDSIM_STATS_HPP_
