#ifndef PEDSIM_REPORT_HPP_
#define PEDSIM_REPORT_HPP_

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pedsim/metrics.hpp"
#include "pedsim/sim.hpp"
#include "pedsim/stats.hpp"

namespace pedsim {

struct EpisodeAverages
{
  double ttc_avg{0.0};
  double dst_avg{0.0};
  double T_end{0.0};
  bool timeout{false};
};

/// Time averages of the surrogate metrics over [first record, T_end].
/// Throws std::invalid_argument for an empty trace or a zero-length window.
EpisodeAverages episode_averages(const EpisodeTrace &trace, const ScenarioGeometry &geometry,
                                 const MetricOptions &opt = {});

struct EpisodeMetrics
{
  std::string scenario;
  std::string controller;
  std::uint64_t seed{0};
  EpisodeAverages avg;
  Outcome outcome{Outcome::Timeout};
};

struct MetricSummary
{
  std::size_t n{0};        // before filtering
  std::size_t kept{0};
  double mean{0.0};
  double sd{0.0};
  bool undersized{false};
  std::vector<double> filtered;
};

struct GroupSummary
{
  std::string scenario;
  std::string controller;
  MetricSummary ttc;
  MetricSummary dst;
  MetricSummary t_end;
  std::size_t timeouts{0};
};

struct PairTest
{
  std::string a;
  std::string b;
  MannWhitneyResult result;
};

struct MetricTests
{
  std::string scenario;
  std::string metric;  // "ttc_avg" | "dst_avg" | "t_end"
  KruskalResult kw;
  std::vector<PairTest> pairs;
};

struct MetricsReport
{
  std::vector<EpisodeMetrics> episodes;
  std::vector<GroupSummary> groups;
  std::vector<MetricTests> tests;
};

/// IQR filter per (scenario, controller, metric), group means and SDs, then
/// Kruskal-Wallis across controllers and pairwise Mann-Whitney per scenario.
MetricsReport build_report(std::vector<EpisodeMetrics> episodes);

nlohmann::json to_json(const MetricsReport &report);
/// Plain-text table: one row per scenario and controller with mean (sd) of
/// TTC_avg, DST_avg and T_end, followed by the test results.
std::string format_table(const MetricsReport &report);

}  // namespace pedsim

#endif  // PEDSIM_REPORT_HPP_
