// Copyright 2026 The metaheac Authors
// SPDX-License-Identifier: Apache-2.0

#include "metaheac/eval.hpp"

#include <algorithm>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>

#include "metaheac/error.hpp"
#include "metaheac/key_value.hpp"
#include "metaheac/online.hpp"

namespace metaheac {

double auc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw ShapeError("auc: scores and labels differ in length");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // 2 * (concordant pairs) + (tied pairs), accumulated exactly in integers.
  std::uint64_t doubled = 0, positives = 0, negatives = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    std::uint64_t pos = 0, neg = 0;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      (labels[order[j]] ? pos : neg) += 1;
      ++j;
    }
    doubled += pos * (2 * negatives + neg);
    positives += pos;
    negatives += neg;
    i = j;
  }
  if (positives == 0 || negatives == 0) throw ConfigError("auc: both classes must be present");
  return static_cast<double>(doubled) / (2.0 * static_cast<double>(positives) * static_cast<double>(negatives));
}

PrecisionRecall precision_recall_at(std::span<const double> scores, std::span<const int> actual,
                                    std::span<const std::uint64_t> ids, double k_percent) {
  if (scores.empty()) throw ConfigError("precision_recall_at: empty pool");
  if (scores.size() != actual.size()) throw ShapeError("precision_recall_at: scores and labels differ in length");
  if (!(k_percent > 0.0 && k_percent <= 100.0)) throw ConfigError("precision_recall_at: K% must be in (0, 100]");
  PrecisionRecall pr;
  pr.actual = static_cast<std::size_t>(std::count_if(actual.begin(), actual.end(), [](int a) { return a != 0; }));
  if (pr.actual == 0) throw ConfigError("precision_recall_at: no actual audience, recall undefined");
  pr.top = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::floor(k_percent / 100.0 * static_cast<double>(scores.size()))));
  const auto order = rank_order(scores, ids);
  for (std::size_t i = 0; i < pr.top; ++i) pr.hits += actual[order[i]] ? 1 : 0;
  pr.precision = static_cast<double>(pr.hits) / static_cast<double>(pr.top);
  pr.recall = static_cast<double>(pr.hits) / static_cast<double>(pr.actual);
  return pr;
}

TaskGroups group_tasks(std::span<const std::size_t> seed_counts, std::optional<std::size_t> override_threshold) {
  TaskGroups g;
  if (override_threshold) {
    g.threshold = *override_threshold;
  } else {
    if (seed_counts.empty()) throw ConfigError("group_tasks: no tasks");
    std::vector<std::size_t> sorted(seed_counts.begin(), seed_counts.end());
    std::sort(sorted.begin(), sorted.end());
    const std::size_t n = sorted.size();
    const std::size_t need = (8 * n + 9) / 10;  // ceil(0.8 n)
    g.threshold = sorted[need - 1];
  }
  for (std::size_t s : seed_counts) g.small.push_back(s <= g.threshold);
  return g;
}

void EvalReport::recompute_means() {
  small = {};
  large = {};
  for (const auto& t : tasks) {
    GroupMeans& g = t.small ? small : large;
    ++g.tasks;
    g.auc += t.auc;
    g.precision += t.precision;
    g.recall += t.recall;
  }
  for (GroupMeans* g : {&small, &large}) {
    if (g->tasks == 0) continue;
    const double n = static_cast<double>(g->tasks);
    g->auc /= n;
    g->precision /= n;
    g->recall /= n;
  }
}

EvalReport make_report(std::span<const CampaignTask> tasks, std::span<const std::vector<double>> scores,
                       double k_percent, std::uint64_t seed, std::optional<std::size_t> override_threshold) {
  if (tasks.size() != scores.size()) throw ShapeError("make_report: one score vector per task expected");
  std::vector<std::size_t> seed_counts;
  for (const auto& t : tasks) seed_counts.push_back(t.seed_count());
  const TaskGroups groups = group_tasks(seed_counts, override_threshold);

  EvalReport report;
  report.seed = seed;
  report.k_percent = k_percent;
  report.threshold = groups.threshold;
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    const auto& pool = tasks[i].eval_pool;
    if (pool.empty()) throw ConfigError("task '" + tasks[i].id() + "' has no evaluation pool");
    if (scores[i].size() != pool.size()) throw ShapeError("make_report: score count differs from pool size");
    std::vector<int> actual;
    std::vector<std::uint64_t> ids;
    for (const auto& u : pool) {
      actual.push_back(u.actual ? 1 : 0);
      ids.push_back(u.user.id);
    }
    const auto pr = precision_recall_at(scores[i], actual, ids, k_percent);
    report.tasks.push_back({tasks[i].id(), seed_counts[i], groups.small[i], auc(scores[i], actual), pr.precision,
                            pr.recall});
  }
  report.recompute_means();
  return report;
}

std::vector<std::vector<double>> score_eval_pools(const MetaHeacModel& model, std::span<const CampaignTask> tasks,
                                                  std::size_t threads) {
  std::vector<std::vector<double>> out;
  for (const auto& t : tasks) {
    std::vector<const UserRecord*> users;
    for (const auto& u : t.eval_pool) users.push_back(&u.user);
    out.push_back(score_candidates(model, t.campaign, users, threads));
  }
  return out;
}

void write_report(std::ostream& out, const EvalReport& r) {
  const std::string k = format_double(r.k_percent);
  out << "# metaheac-report seed=" << r.seed << " k=" << k << " T=" << r.threshold << '\n';
  out << "task\tseeds\tgroup\tauc\tp@" << k << "%\tr@" << k << "%\n";
  for (const auto& t : r.tasks) {
    out << t.task << '\t' << t.seeds << '\t' << (t.small ? "<=T" : ">T") << '\t' << format_double(t.auc) << '\t'
        << format_double(t.precision) << '\t' << format_double(t.recall) << '\n';
  }
  auto mean_row = [&](const GroupMeans& g, const char* label) {
    if (g.tasks == 0) return;
    out << "mean\t" << g.tasks << '\t' << label << '\t' << format_double(g.auc) << '\t'
        << format_double(g.precision) << '\t' << format_double(g.recall) << '\n';
  };
  mean_row(r.small, "<=T");
  mean_row(r.large, ">T");
}

PairedTest paired_t_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ConfigError("paired_t_test: samples differ in length");
  if (a.size() < 2) throw ConfigError("paired_t_test: at least 2 pairs required");
  PairedTest r;
  r.n = a.size();
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  const double n = static_cast<double>(r.n);
  r.mean_diff = std::accumulate(d.begin(), d.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : d) ss += (x - r.mean_diff) * (x - r.mean_diff);
  const double sd = std::sqrt(ss / (n - 1.0));
  if (sd == 0.0) {
    if (r.mean_diff == 0.0) {
      r.t = 0.0;
      r.p = 1.0;
    } else {
      r.t = std::copysign(std::numeric_limits<double>::infinity(), r.mean_diff);
      r.p = 0.0;
    }
    return r;
  }
  r.t = r.mean_diff / (sd / std::sqrt(n));
  boost::math::students_t dist(n - 1.0);
  r.p = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(r.t)));
  return r;
}

double group_metric(const EvalReport& report, Metric metric, Group group) {
  const GroupMeans& g = group == Group::kSmall ? report.small : report.large;
  if (g.tasks == 0) throw ConfigError("group_metric: report has no tasks in the requested group");
  switch (metric) {
    case Metric::kAuc: return g.auc;
    case Metric::kPrecision: return g.precision;
    case Metric::kRecall: return g.recall;
  }
  return g.auc;
}

RunAggregate aggregate_runs(std::span<const EvalReport> method, std::span<const EvalReport> baseline, Metric metric,
                            Group group) {
  if (method.size() != baseline.size()) throw ConfigError("aggregate_runs: run counts differ");
  if (method.size() < 2) throw ConfigError("aggregate_runs: at least 2 runs required");
  std::vector<double> a, b;
  for (std::size_t i = 0; i < method.size(); ++i) {
    const auto& x = method[i].tasks;
    const auto& y = baseline[i].tasks;
    bool same = x.size() == y.size() && method[i].tasks.size() == method.front().tasks.size();
    for (std::size_t j = 0; same && j < x.size(); ++j) same = x[j].task == y[j].task && x[j].small == y[j].small;
    if (!same) throw ConfigError("aggregate_runs: task sets differ in run " + std::to_string(i));
    a.push_back(group_metric(method[i], metric, group));
    b.push_back(group_metric(baseline[i], metric, group));
  }
  RunAggregate r;
  r.runs = a.size();
  r.mean = std::accumulate(a.begin(), a.end(), 0.0) / static_cast<double>(r.runs);
  r.baseline_mean = std::accumulate(b.begin(), b.end(), 0.0) / static_cast<double>(r.runs);
  r.test = paired_t_test(a, b);
  return r;
}

}  // namespace metaheac
