// Copyright 2026 The metaheac Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "metaheac/data_io.hpp"
#include "metaheac/model.hpp"

namespace metaheac {

/// Mann-Whitney AUC with ties credited 0.5, computed by sorting. Labels are
/// 0/1. Throws ConfigError when either class is absent.
double auc(std::span<const double> scores, std::span<const int> labels);

struct PrecisionRecall {
  double precision = 0.0;
  double recall = 0.0;
  std::size_t top = 0;   // |topK|
  std::size_t hits = 0;  // |actual ∩ topK|
  std::size_t actual = 0;
};

/// topK = max(1, floor(k_percent / 100 * pool)) best candidates, ties by id
/// ascending (the expand() order). Throws ConfigError when nothing is actual.
PrecisionRecall precision_recall_at(std::span<const double> scores, std::span<const int> actual,
                                    std::span<const std::uint64_t> ids, double k_percent = 5.0);

struct TaskGroups {
  std::size_t threshold = 0;  // T
  std::vector<bool> small;    // per task: seed count <= T
};

/// T is the smallest seed count with at least 80% of the tasks at or below
/// it, unless `override_threshold` is given.
TaskGroups group_tasks(std::span<const std::size_t> seed_counts,
                       std::optional<std::size_t> override_threshold = std::nullopt);

struct TaskMetrics {
  std::string task;
  std::size_t seeds = 0;
  bool small = true;
  double auc = 0.0;
  double precision = 0.0;
  double recall = 0.0;
};

struct GroupMeans {
  std::size_t tasks = 0;
  double auc = 0.0;
  double precision = 0.0;
  double recall = 0.0;
};

struct EvalReport {
  std::uint64_t seed = 0;
  double k_percent = 5.0;
  std::size_t threshold = 0;
  std::vector<TaskMetrics> tasks;
  GroupMeans small;  // seed count <= T
  GroupMeans large;  // seed count > T

  void recompute_means();
};

/// Metrics of per-task scores against each task's evaluation pool.
/// `scores[i]` scores `tasks[i].eval_pool` in pool order.
EvalReport make_report(std::span<const CampaignTask> tasks, std::span<const std::vector<double>> scores,
                       double k_percent, std::uint64_t seed,
                       std::optional<std::size_t> override_threshold = std::nullopt);

/// Scores every task's evaluation pool with one model (no fine-tuning).
std::vector<std::vector<double>> score_eval_pools(const MetaHeacModel& model, std::span<const CampaignTask> tasks,
                                                  std::size_t threads = 1);

// Tab-separated report, one row per task plus group means:
//   # metaheac-report seed=<s> k=<K> T=<T>
//   task  seeds  group  auc  p@K%  r@K%
//   ...
//   mean  <n>  <=T|>T  ...
void write_report(std::ostream& out, const EvalReport& report);

struct PairedTest {
  std::size_t n = 0;
  double mean_diff = 0.0;  // mean(a - b)
  double t = 0.0;
  double p = 1.0;          // two-sided
};

/// Two-sided paired t-test on a - b. Zero variance gives t = 0, p = 1 when
/// the mean difference is 0, and t = +-inf, p = 0 otherwise.
PairedTest paired_t_test(std::span<const double> a, std::span<const double> b);

enum class Metric { kAuc, kPrecision, kRecall };
enum class Group { kSmall, kLarge };

struct RunAggregate {
  std::size_t runs = 0;
  double mean = 0.0;           // method, mean over runs of the group mean
  double baseline_mean = 0.0;
  PairedTest test;             // paired over runs
};

/// Pairs run i of `method` with run i of `baseline`. Throws ConfigError on
/// fewer than 2 runs, unequal run counts or mismatched task sets.
RunAggregate aggregate_runs(std::span<const EvalReport> method, std::span<const EvalReport> baseline, Metric metric,
                            Group group = Group::kSmall);

double group_metric(const EvalReport& report, Metric metric, Group group);

}  // namespace metaheac
