#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "pedsim/stats.hpp"

using namespace pedsim;

namespace {

/// Normal approximation with continuity correction, tie-free.
double mw_normal_p(double u, double na, double nb)
{
  const double mu = na * nb / 2.0;
  const double sigma = std::sqrt(na * nb * (na + nb + 1.0) / 12.0);
  const double z = std::max(0.0, std::abs(u - mu) - 0.5) / sigma;
  return std::min(1.0, std::erfc(z / std::sqrt(2.0)));
}

std::vector<double> draw(std::mt19937_64 &rng, std::size_t n, double shift, bool integer)
{
  std::normal_distribution<double> N(shift, 1.0);
  std::vector<double> v(n);
  for (auto &x : v) x = integer ? std::round(2.0 * N(rng)) : N(rng);
  return v;
}

}  // namespace

TEST(Quantile, MatchesOracle)
{
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 50; ++trial) {
    const auto v = draw(rng, 3 + trial % 17, 0.0, trial % 2 == 0);
    for (double q : {0.0, 0.25, 0.5, 0.75, 1.0}) EXPECT_NEAR(quantile_linear(v, q), oracle::quartile(v, q), 1e-12);
  }
}

TEST(MeanSd, Examples)
{
  const std::vector<double> x{2, 4, 4, 4, 5, 5, 7, 9};
  EXPECT_DOUBLE_EQ(mean(x), 5.0);
  EXPECT_NEAR(stddev(x), std::sqrt(32.0 / 7.0), 1e-12);
  const std::vector<double> one{3.0};
  EXPECT_EQ(stddev(one), 0.0);
}

TEST(IqrFilter, DropsFarOutlier)
{
  const std::vector<double> x{1, 2, 3, 4, 100};
  const auto r = iqr_filter(x);
  EXPECT_EQ(r.values, (std::vector<double>{1, 2, 3, 4}));
  EXPECT_EQ(r.removed, 1u);
}

TEST(IqrFilter, CleanSampleUnchanged)
{
  std::vector<double> x;
  for (int i = 1; i <= 20; ++i) x.push_back(i);
  EXPECT_EQ(iqr_filter(x).values, x);
}

TEST(IqrFilter, AllEqualUnchanged)
{
  const std::vector<double> x(7, 2.5);
  EXPECT_EQ(iqr_filter(x).values, x);
}

TEST(IqrFilter, UndersizedFlagged)
{
  const std::vector<double> x{1, 2, 1000};
  const auto r = iqr_filter(x);
  EXPECT_TRUE(r.undersized);
  EXPECT_EQ(r.values, x);
}

TEST(IqrFilter, BandFromOracleQuartiles)
{
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 50; ++trial) {
    auto x = draw(rng, 12, 0.0, false);
    x.push_back(25.0);
    const double q1 = oracle::quartile(x, 0.25), q3 = oracle::quartile(x, 0.75);
    const double lo = q1 - 1.5 * (q3 - q1), hi = q3 + 1.5 * (q3 - q1);
    std::vector<double> expected;
    for (double v : x)
      if (v >= lo && v <= hi) expected.push_back(v);
    const auto r = iqr_filter(x);
    EXPECT_EQ(r.values, expected);
    EXPECT_GE(r.removed, 1u);
  }
}

TEST(Midranks, MatchOracle)
{
  const std::vector<double> x{3, 1, 3, 2, 3, 1};
  EXPECT_EQ(midranks(x), oracle::naive_ranks(x));
}

TEST(KruskalWallis, IdenticalGroupsGiveZero)
{
  const std::vector<std::vector<double>> g{{1, 2, 3}, {1, 2, 3}, {1, 2, 3}};
  EXPECT_NEAR(kruskal_wallis(g).H, 0.0, 1e-12);
}

TEST(KruskalWallis, MatchesBruteForceOracle)
{
  std::mt19937_64 rng(100);
  for (int trial = 0; trial < 100; ++trial) {
    const bool ties = trial % 2 == 0;
    const std::vector<std::vector<double>> g{draw(rng, 5 + trial % 7, 0.0, ties), draw(rng, 6, 0.4, ties),
                                             draw(rng, 4 + trial % 5, -0.3, ties)};
    const auto r = kruskal_wallis(g);
    EXPECT_NEAR(r.H, oracle::kruskal_h(g), 1e-9);
    EXPECT_EQ(r.df, 2);
    // Chi-square with two degrees of freedom has survival exp(-x/2).
    EXPECT_NEAR(r.p, std::exp(-r.H / 2.0), 1e-9);
    EXPECT_EQ(r.significant, r.H >= 9.21);
  }
}

TEST(KruskalWallis, InvariantUnderMonotoneTransform)
{
  std::mt19937_64 rng(4);
  const std::vector<std::vector<double>> g{draw(rng, 8, 0, false), draw(rng, 8, 1, false), draw(rng, 8, 2, false)};
  auto t = g;
  for (auto &grp : t)
    for (auto &v : grp) v = std::exp(3.0 * v) + 7.0;
  EXPECT_NEAR(kruskal_wallis(g).H, kruskal_wallis(t).H, 1e-9);
}

TEST(KruskalWallis, CriticalValue) { EXPECT_EQ(kKruskalCritical, 9.21); }

TEST(KruskalWallis, RejectsEmptyGroups)
{
  EXPECT_THROW(kruskal_wallis({{1, 2}, {}}), std::invalid_argument);
  EXPECT_THROW(kruskal_wallis({{1, 2}}), std::invalid_argument);
}

TEST(MannWhitney, SeparatedTriples)
{
  const std::vector<double> a{1, 2, 3}, b{10, 11, 12};
  const auto r = mann_whitney(a, b);
  EXPECT_EQ(r.U, 0.0);
  EXPECT_TRUE(r.exact);
  EXPECT_NEAR(r.p, 0.1, 1e-12);
  EXPECT_NEAR(r.p, oracle::mann_whitney_exact_p(a, b), 1e-12);
}

TEST(MannWhitney, ExactMatchesEnumeration)
{
  std::mt19937_64 rng(55);
  for (int trial = 0; trial < 30; ++trial) {
    const auto a = draw(rng, 2 + trial % 6, 0.0, false);
    const auto b = draw(rng, 3 + trial % 5, 0.7, false);
    const auto r = mann_whitney(a, b);
    ASSERT_TRUE(r.exact);
    EXPECT_NEAR(r.p, oracle::mann_whitney_exact_p(a, b), 1e-12);
    EXPECT_EQ(r.U_a, oracle::mann_whitney_u(a, b));
  }
}

TEST(MannWhitney, Symmetric)
{
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 20; ++trial) {
    const auto a = draw(rng, 4 + trial, 0.0, trial % 3 == 0);
    const auto b = draw(rng, 6, 0.5, trial % 3 == 0);
    EXPECT_NEAR(mann_whitney(a, b).p, mann_whitney(b, a).p, 1e-12);
    EXPECT_EQ(mann_whitney(a, b).U, mann_whitney(b, a).U);
  }
}

TEST(MannWhitney, IdenticalSamplesNearOne)
{
  const std::vector<double> a{1, 2, 3, 4, 5};
  EXPECT_GT(mann_whitney(a, a).p, 0.9);
}

TEST(MannWhitney, ExactAndNormalAgreeOnEightByEight)
{
  std::mt19937_64 rng(88);
  for (int trial = 0; trial < 25; ++trial) {
    const auto a = draw(rng, 8, 0.0, false);
    const auto b = draw(rng, 8, 0.1 * trial, false);
    const auto r = mann_whitney(a, b);
    ASSERT_TRUE(r.exact);
    EXPECT_NEAR(r.p, mw_normal_p(r.U_a, 8, 8), 0.02);
  }
}

TEST(MannWhitney, ApproximateBranchNearEnumeration)
{
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 5; ++trial) {
    const auto a = draw(rng, 9, 0.0, false);
    const auto b = draw(rng, 9, 0.3 * trial, false);
    const auto r = mann_whitney(a, b);
    ASSERT_FALSE(r.exact);
    EXPECT_GT(r.p, 0.0);
    EXPECT_LE(r.p, 1.0);
    EXPECT_NEAR(r.p, oracle::mann_whitney_exact_p(a, b), 0.02);
  }
}
