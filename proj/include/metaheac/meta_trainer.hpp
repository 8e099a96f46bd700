// Copyright 2026 The metaheac Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "metaheac/adam.hpp"
#include "metaheac/data_io.hpp"
#include "metaheac/meta_grad.hpp"
#include "metaheac/model.hpp"

namespace metaheac {

enum class TrainMode {
  kMeta,   // support/query inner adaptation with an outer Adam update
  kJoint,  // plain minibatch BCE over the pooled examples of all tasks
};

std::string to_string(TrainMode mode);
TrainMode parse_train_mode(std::string_view text);

struct TrainConfig {
  double alpha = 0.001;  // inner SGD step
  double beta = 0.001;   // outer Adam learning rate
  std::size_t batch_size = 512;
  std::size_t tasks_per_iter = 5;
  std::size_t epochs = 1;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  bool second_order = true;
  Reduction reduction = Reduction::kMean;
  TrainMode mode = TrainMode::kMeta;
  std::uint64_t seed = 1;
  std::size_t threads = 1;

  AdamConfig adam() const { return {beta, adam_beta1, adam_beta2, adam_epsilon}; }
  MetaOrder order() const { return second_order ? MetaOrder::kSecond : MetaOrder::kFirst; }
  /// Throws ConfigError unless alpha >= 0, beta > 0, batch_size >= 2 and tasks_per_iter, epochs >= 1.
  void validate() const;
};

/// Disjoint support (D^a) and query (D^b) batches drawn from one task.
struct TaskBatchSample {
  std::size_t task = 0;  // index into the task list
  LabeledBatch support;
  LabeledBatch query;
};

/// Partition-then-draw: both halves get s = min(batch_size, floor(n / 2))
/// examples. Positives and negatives are shuffled separately and interleaved
/// so that every prefix is stratified; the first 2s examples are split with
/// ceil/floor halves of the positives going to support/query.
TaskBatchSample sample_task(std::span<const CampaignTask> tasks, std::size_t task, std::size_t batch_size, Rng& rng);

std::vector<TaskBatchSample> sample_task_batch(std::span<const CampaignTask> tasks,
                                               std::span<const std::size_t> which, std::size_t batch_size,
                                               Rng& rng);

struct TaskLoss {
  std::size_t task = 0;
  double loss_a = 0.0;
  double loss_b = 0.0;
};

struct StepReport {
  std::vector<TaskLoss> losses;
};

/// Sum of the per-task meta-gradients, accumulated in sample order.
ParamSet summed_meta_gradient(const MetaHeacModel& model, std::span<const TaskBatchSample> batch,
                              const TrainConfig& cfg, StepReport* report = nullptr);

/// One outer update: per-task meta-gradients (in parallel), summed in sample
/// order, then a single Adam step on the model. On any error the model and
/// the optimizer state are left unchanged.
StepReport meta_step(MetaHeacModel& model, Adam& adam, std::span<const TaskBatchSample> batch,
                     const TrainConfig& cfg);

struct HistoryRecord {
  std::size_t iter = 0;
  std::string task;  // task id, or "pooled" in joint mode
  double loss_a = std::numeric_limits<double>::quiet_NaN();
  double loss_b = 0.0;
};

struct TrainResult {
  MetaHeacModel model;
  std::vector<HistoryRecord> history;
  std::size_t iterations = 0;
};

using ProgressFn = std::function<void(const HistoryRecord&)>;

/// Offline stage. In meta mode each epoch visits task c ceil(n_c / (2 *
/// batch_size)) times in shuffled order, tasks_per_iter visits per outer
/// step, resampling support/query on every visit. In joint mode each epoch
/// is one shuffled pass over all pooled examples in minibatches.
TrainResult train_offline(MetaHeacModel model, std::span<const CampaignTask> tasks, const TrainConfig& cfg,
                          const ProgressFn& progress = {});

/// All labeled examples of a task as one batch.
LabeledBatch full_batch(const CampaignTask& task);

}  // namespace metaheac
