// Copyright 2026 The metaheac Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "metaheac/data_io.hpp"
#include "metaheac/model.hpp"

namespace metaheac {

struct FineTuneConfig {
  double lr = 0.001;
  std::size_t max_epochs = 50;
  double rel_tol = 1e-3;
  std::size_t patience = 3;
  std::size_t batch_size = 512;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  Reduction reduction = Reduction::kMean;
  std::uint64_t seed = 1;

  /// lr may be 0 (a no-op run); everything else must be positive.
  void validate() const;
};

struct FineTuneResult {
  MetaHeacModel model;
  /// Mean BCE over the task's labeled set: [0] before any update, [e] after epoch e.
  std::vector<double> epoch_losses;
  std::size_t epochs = 0;
};

/// Adam over every parameter on minibatches of the task's labeled set. Stops
/// after `patience` consecutive epochs whose relative loss improvement
/// (L[e-1] - L[e]) / L[e-1] is below rel_tol, or after max_epochs.
/// Throws ConfigError when the task has no seeds or no negatives.
FineTuneResult finetune(const MetaHeacModel& general, const CampaignTask& task, const FineTuneConfig& cfg);

struct ScoredUser {
  std::uint64_t id = 0;
  double score = 0.0;
  bool operator==(const ScoredUser&) const = default;
};

struct ExpansionResult {
  std::vector<ScoredUser> ranking;     // scores non-increasing, ties by id ascending
  std::vector<std::uint64_t> selected;  // first k of the ranking
  std::size_t k = 0;
};

/// Scores fixed 2048-candidate shards in parallel, so the output does not
/// depend on `threads` (0 = all cores). Throws ConfigError when k > pool.
ExpansionResult expand(const MetaHeacModel& model, const CampaignRecord& campaign,
                       std::span<const UserRecord> candidates, std::size_t k, std::size_t threads = 1);

/// Scores in candidate order, with the same sharding as expand().
std::vector<double> score_candidates(const MetaHeacModel& model, const CampaignRecord& campaign,
                                     std::span<const UserRecord* const> candidates, std::size_t threads = 1);

/// Indices of `scores` sorted by score descending, then id ascending.
std::vector<std::size_t> rank_order(std::span<const double> scores, std::span<const std::uint64_t> ids);

}  // namespace metaheac
