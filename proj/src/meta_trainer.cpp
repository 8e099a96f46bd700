// Copyright 2026 The metaheac Authors
// SPDX-License-Identifier: Apache-2.0

#include "metaheac/meta_trainer.hpp"

#include <algorithm>
#include <optional>

#include "metaheac/error.hpp"
#include "metaheac/parallel.hpp"

namespace metaheac {
namespace {

constexpr std::uint64_t kScheduleStream = 11;

void add_into(ParamSet& acc, const ParamSet& g) {
  for (std::size_t i = 0; i < acc.size(); ++i) {
    auto dst = acc.entry(i).value.data();
    auto src = g.entry(i).value.data();
    for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += src[j];
  }
}

}  // namespace

std::string to_string(TrainMode mode) { return mode == TrainMode::kMeta ? "meta" : "joint"; }

TrainMode parse_train_mode(std::string_view text) {
  if (text == "meta") return TrainMode::kMeta;
  if (text == "joint") return TrainMode::kJoint;
  throw ConfigError("unknown training mode '" + std::string(text) + "' (expected meta or joint)");
}

void TrainConfig::validate() const {
  if (!(alpha >= 0.0)) throw ConfigError("alpha must be >= 0");
  if (!(beta > 0.0)) throw ConfigError("beta must be > 0");
  if (batch_size < 2) throw ConfigError("batch_size must be >= 2");
  if (tasks_per_iter < 1) throw ConfigError("tasks_per_iter must be >= 1");
  if (epochs < 1) throw ConfigError("epochs must be >= 1");
}

LabeledBatch full_batch(const CampaignTask& task) {
  LabeledBatch b;
  for (const auto& ex : task.examples) b.push(task.campaign, ex.user, ex.label);
  return b;
}

TaskBatchSample sample_task(std::span<const CampaignTask> tasks, std::size_t task, std::size_t batch_size,
                            Rng& rng) {
  const CampaignTask& t = tasks[task];
  const std::size_t n = t.examples.size();
  const std::size_t s = std::min(batch_size, n / 2);
  if (s == 0) throw ConfigError("task '" + t.id() + "' needs at least 2 labeled examples");

  std::vector<std::size_t> pos, neg;
  for (std::size_t i = 0; i < n; ++i) (t.examples[i].label ? pos : neg).push_back(i);
  std::shuffle(pos.begin(), pos.end(), rng);
  std::shuffle(neg.begin(), neg.end(), rng);

  // Merge by within-class quantile (2i+1)/2P vs (2j+1)/2N; any prefix stays stratified.
  std::vector<std::size_t> order;
  order.reserve(2 * s);
  std::size_t i = 0, j = 0;
  while (order.size() < 2 * s) {
    const bool take_pos =
        j == neg.size() || (i < pos.size() && (2 * i + 1) * neg.size() <= (2 * j + 1) * pos.size());
    order.push_back(take_pos ? pos[i++] : neg[j++]);
  }

  const std::size_t pos_support = (i + 1) / 2;
  const std::size_t neg_support = s - pos_support;
  TaskBatchSample out;
  out.task = task;
  std::size_t ps = 0, ns = 0;
  for (std::size_t idx : order) {
    const auto& ex = t.examples[idx];
    bool to_support = ex.label ? ps++ < pos_support : ns++ < neg_support;
    (to_support ? out.support : out.query).push(t.campaign, ex.user, ex.label);
  }
  return out;
}

std::vector<TaskBatchSample> sample_task_batch(std::span<const CampaignTask> tasks,
                                               std::span<const std::size_t> which, std::size_t batch_size,
                                               Rng& rng) {
  std::vector<TaskBatchSample> out;
  out.reserve(which.size());
  for (std::size_t t : which) out.push_back(sample_task(tasks, t, batch_size, rng));
  return out;
}

ParamSet summed_meta_gradient(const MetaHeacModel& model, std::span<const TaskBatchSample> batch,
                              const TrainConfig& cfg, StepReport* report) {
  std::vector<std::optional<MetaGradient>> parts(batch.size());
  parallel_for(batch.size(), cfg.threads, [&](std::size_t k) {
    const TaskBatchSample& sample = batch[k];
    LossFn loss_a = [&](Tape&, const BoundParams& p) { return model.loss(p, sample.support, cfg.reduction); };
    LossFn loss_b = [&](Tape&, const BoundParams& p) { return model.loss(p, sample.query, cfg.reduction); };
    parts[k] = meta_grad(model.params(), loss_a, loss_b, cfg.alpha, cfg.order());
  });
  ParamSet total = model.params().zeros_like();
  for (std::size_t k = 0; k < parts.size(); ++k) {
    add_into(total, parts[k]->grad);
    if (report) report->losses.push_back({batch[k].task, parts[k]->loss_a, parts[k]->loss_b});
  }
  check_finite(total, "meta_step");
  return total;
}

StepReport meta_step(MetaHeacModel& model, Adam& adam, std::span<const TaskBatchSample> batch,
                     const TrainConfig& cfg) {
  if (batch.empty()) throw ConfigError("meta_step: empty task batch");
  StepReport report;
  ParamSet total = summed_meta_gradient(model, batch, cfg, &report);
  adam.step(model.params(), total);
  return report;
}

namespace {

TrainResult train_meta(MetaHeacModel model, std::span<const CampaignTask> tasks, const TrainConfig& cfg,
                       const ProgressFn& progress) {
  Rng rng(derive_seed(cfg.seed, kScheduleStream));
  Adam adam(cfg.adam());
  TrainResult result{std::move(model), {}, 0};
  std::vector<std::size_t> visits;
  for (std::size_t t = 0; t < tasks.size(); ++t) {
    const std::size_t n = tasks[t].examples.size();
    const std::size_t count = (n + 2 * cfg.batch_size - 1) / (2 * cfg.batch_size);
    visits.insert(visits.end(), count, t);
  }
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(visits.begin(), visits.end(), rng);
    for (std::size_t start = 0; start < visits.size(); start += cfg.tasks_per_iter) {
      const std::size_t stop = std::min(visits.size(), start + cfg.tasks_per_iter);
      auto batch = sample_task_batch(tasks, std::span(visits).subspan(start, stop - start), cfg.batch_size, rng);
      StepReport report = meta_step(result.model, adam, batch, cfg);
      for (const auto& l : report.losses) {
        HistoryRecord rec{result.iterations, tasks[l.task].id(), l.loss_a, l.loss_b};
        if (progress) progress(rec);
        result.history.push_back(std::move(rec));
      }
      ++result.iterations;
    }
  }
  return result;
}

TrainResult train_joint(MetaHeacModel model, std::span<const CampaignTask> tasks, const TrainConfig& cfg,
                        const ProgressFn& progress) {
  Rng rng(derive_seed(cfg.seed, kScheduleStream));
  Adam adam(cfg.adam());
  TrainResult result{std::move(model), {}, 0};
  std::vector<std::pair<std::size_t, std::size_t>> pooled;
  for (std::size_t t = 0; t < tasks.size(); ++t) {
    for (std::size_t i = 0; i < tasks[t].examples.size(); ++i) pooled.emplace_back(t, i);
  }
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(pooled.begin(), pooled.end(), rng);
    for (std::size_t start = 0; start < pooled.size(); start += cfg.batch_size) {
      const std::size_t stop = std::min(pooled.size(), start + cfg.batch_size);
      LabeledBatch batch;
      for (std::size_t k = start; k < stop; ++k) {
        const auto& [t, i] = pooled[k];
        batch.push(tasks[t].campaign, tasks[t].examples[i].user, tasks[t].examples[i].label);
      }
      Tape tape;
      BoundParams p = BoundParams::bind(tape, result.model.params());
      Var loss = result.model.loss(p, batch, cfg.reduction);
      ParamSet g = grad(loss, p);
      adam.step(result.model.params(), g);
      HistoryRecord rec{result.iterations, "pooled", std::numeric_limits<double>::quiet_NaN(), loss.value().item()};
      if (progress) progress(rec);
      result.history.push_back(std::move(rec));
      ++result.iterations;
    }
  }
  return result;
}

}  // namespace

TrainResult train_offline(MetaHeacModel model, std::span<const CampaignTask> tasks, const TrainConfig& cfg,
                          const ProgressFn& progress) {
  cfg.validate();
  if (tasks.empty()) throw ConfigError("train_offline: no training tasks");
  if (cfg.mode == TrainMode::kJoint) return train_joint(std::move(model), tasks, cfg, progress);
  return train_meta(std::move(model), tasks, cfg, progress);
}

}  // namespace metaheac
