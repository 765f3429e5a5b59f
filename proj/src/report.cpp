#include "pedsim/report.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <sstream>
#include <stdexcept>
#include <tuple>

namespace pedsim {

using nlohmann::json;

EpisodeAverages episode_averages(const EpisodeTrace &trace, const ScenarioGeometry &geometry,
                                 const MetricOptions &opt)
{
  if (trace.records.empty()) {
    throw std::invalid_argument("episode_averages: empty trace");
  }
  std::vector<double> t, ttc, dst;
  t.reserve(trace.records.size());
  ttc.reserve(trace.records.size());
  dst.reserve(trace.records.size());
  for (const auto &r : trace.records) {
    t.push_back(r.state.t);
    ttc.push_back(ttc_metric(r.state, geometry, opt));
    dst.push_back(dst_metric(r.state, geometry, opt));
  }
  EpisodeAverages a;
  a.T_end = trace.T_end;
  a.timeout = trace.outcome == Outcome::Timeout;
  a.ttc_avg = time_average(t, ttc, trace.T_end);
  a.dst_avg = time_average(t, dst, trace.T_end);
  return a;
}

namespace {

MetricSummary summarize(const std::vector<double> &x)
{
  MetricSummary s;
  s.n = x.size();
  const auto f = iqr_filter(x);
  s.filtered = f.values;
  s.kept = f.values.size();
  s.undersized = f.undersized;
  s.mean = mean(f.values);
  s.sd = stddev(f.values);
  return s;
}

const MetricSummary &pick(const GroupSummary &g, const std::string &metric)
{
  if (metric == "ttc_avg") return g.ttc;
  if (metric == "dst_avg") return g.dst;
  return g.t_end;
}

json to_json(const MetricSummary &m)
{
  return json{{"n", m.n}, {"kept", m.kept}, {"mean", m.mean}, {"sd", m.sd}, {"undersized", m.undersized}};
}

}  // namespace

MetricsReport build_report(std::vector<EpisodeMetrics> episodes)
{
  std::sort(episodes.begin(), episodes.end(), [](const auto &a, const auto &b) {
    return std::tie(a.scenario, a.controller, a.seed) < std::tie(b.scenario, b.controller, b.seed);
  });

  MetricsReport rep;
  std::map<std::pair<std::string, std::string>, std::vector<const EpisodeMetrics *>> by_group;
  for (const auto &e : episodes) {
    by_group[{e.scenario, e.controller}].push_back(&e);
  }
  for (const auto &[key, list] : by_group) {
    std::vector<double> ttc, dst, tend;
    GroupSummary g;
    g.scenario = key.first;
    g.controller = key.second;
    for (const auto *e : list) {
      ttc.push_back(e->avg.ttc_avg);
      dst.push_back(e->avg.dst_avg);
      tend.push_back(e->avg.T_end);
      g.timeouts += e->avg.timeout ? 1 : 0;
    }
    g.ttc = summarize(ttc);
    g.dst = summarize(dst);
    g.t_end = summarize(tend);
    rep.groups.push_back(std::move(g));
  }

  std::map<std::string, std::vector<const GroupSummary *>> by_scenario;
  for (const auto &g : rep.groups) {
    by_scenario[g.scenario].push_back(&g);
  }
  for (const auto &[scenario, gs] : by_scenario) {
    if (gs.size() < 2) {
      continue;
    }
    for (const std::string metric : {"ttc_avg", "dst_avg", "t_end"}) {
      MetricTests mt;
      mt.scenario = scenario;
      mt.metric = metric;
      std::vector<std::vector<double>> samples;
      bool ok = true;
      for (const auto *g : gs) {
        samples.push_back(pick(*g, metric).filtered);
        ok = ok && !samples.back().empty();
      }
      if (!ok) {
        continue;
      }
      mt.kw = kruskal_wallis(samples);
      for (std::size_t i = 0; i < gs.size(); ++i) {
        for (std::size_t j = i + 1; j < gs.size(); ++j) {
          mt.pairs.push_back({gs[i]->controller, gs[j]->controller, mann_whitney(samples[i], samples[j])});
        }
      }
      rep.tests.push_back(std::move(mt));
    }
  }
  rep.episodes = std::move(episodes);
  return rep;
}

json to_json(const MetricsReport &report)
{
  json eps = json::array();
  for (const auto &e : report.episodes) {
    eps.push_back({{"scenario", e.scenario},
                   {"controller", e.controller},
                   {"seed", e.seed},
                   {"ttc_avg", e.avg.ttc_avg},
                   {"dst_avg", e.avg.dst_avg},
                   {"t_end", e.avg.T_end},
                   {"outcome", std::string(to_string(e.outcome))}});
  }
  json groups = json::array();
  for (const auto &g : report.groups) {
    groups.push_back({{"scenario", g.scenario},
                      {"controller", g.controller},
                      {"ttc_avg", to_json(g.ttc)},
                      {"dst_avg", to_json(g.dst)},
                      {"t_end", to_json(g.t_end)},
                      {"timeouts", g.timeouts}});
  }
  json tests = json::array();
  for (const auto &t : report.tests) {
    json pairs = json::array();
    for (const auto &p : t.pairs) {
      pairs.push_back({{"a", p.a},
                       {"b", p.b},
                       {"U", p.result.U},
                       {"p", p.result.p},
                       {"exact", p.result.exact}});
    }
    tests.push_back({{"scenario", t.scenario},
                     {"metric", t.metric},
                     {"H", t.kw.H},
                     {"df", t.kw.df},
                     {"p", t.kw.p},
                     {"critical", kKruskalCritical},
                     {"significant", t.kw.significant},
                     {"pairs", pairs}});
  }
  return json{{"conventions",
               {{"quartiles", "linear interpolation at (n-1)q"},
                {"iqr_band", "closed [Q1-1.5IQR, Q3+1.5IQR]"},
                {"kruskal", "midranks with tie correction; chi-square df=k-1"},
                {"mann_whitney", "two-sided; exact if min(n)<=8 and no ties, else normal with tie and continuity "
                                 "correction"}}},
              {"episodes", eps},
              {"groups", groups},
              {"tests", tests}};
}

std::string format_table(const MetricsReport &report)
{
  std::ostringstream os;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-18s %-8s %5s %18s %18s %18s\n", "scenario", "ctrl", "n", "TTC_avg [s]",
                "DST_avg [m/s2]", "T_end [s]");
  os << buf;
  for (const auto &g : report.groups) {
    std::snprintf(buf, sizeof buf, "%-18s %-8s %5zu %9.2f (%6.2f) %9.2f (%6.2f) %9.2f (%6.2f)\n", g.scenario.c_str(),
                  g.controller.c_str(), g.t_end.n, g.ttc.mean, g.ttc.sd, g.dst.mean, g.dst.sd, g.t_end.mean,
                  g.t_end.sd);
    os << buf;
  }
  if (!report.tests.empty()) {
    os << "\nKruskal-Wallis (critical H = 9.21 at df = 2, alpha = 0.01) and pairwise Mann-Whitney p\n";
    for (const auto &t : report.tests) {
      std::snprintf(buf, sizeof buf, "%-18s %-8s H = %8.3f  p = %.3g%s", t.scenario.c_str(), t.metric.c_str(), t.kw.H,
                    t.kw.p, t.kw.significant ? "  *" : "");
      os << buf;
      for (const auto &p : t.pairs) {
        std::snprintf(buf, sizeof buf, "  %s/%s p=%.3g", p.a.c_str(), p.b.c_str(), p.result.p);
        os << buf;
      }
      os << '\n';
    }
  }
  return os.str();
}

}  // namespace pedsim
