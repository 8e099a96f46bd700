// Copyright 2026 The metaheac Authors
// SPDX-License-Identifier: Apache-2.0

#include "metaheac/online.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "metaheac/adam.hpp"
#include "metaheac/error.hpp"
#include "metaheac/meta_trainer.hpp"
#include "metaheac/parallel.hpp"

namespace metaheac {
namespace {

constexpr std::size_t kShard = 2048;
constexpr std::uint64_t kFineTuneStream = 23;

}  // namespace

void FineTuneConfig::validate() const {
  if (!(lr >= 0.0)) throw ConfigError("finetune lr must be >= 0");
  if (max_epochs < 1 || patience < 1 || batch_size < 1) {
    throw ConfigError("finetune max_epochs, patience and batch_size must be >= 1");
  }
  if (!(rel_tol > 0.0)) throw ConfigError("finetune rel_tol must be > 0");
}

FineTuneResult finetune(const MetaHeacModel& general, const CampaignTask& task, const FineTuneConfig& cfg) {
  cfg.validate();
  if (task.seed_count() == 0) throw ConfigError("finetune: task '" + task.id() + "' has no seed users");
  if (task.negative_count() == 0) throw ConfigError("finetune: task '" + task.id() + "' has no negatives");

  FineTuneResult result{general, {}, 0};
  const LabeledBatch all = full_batch(task);
  Adam adam({cfg.lr, cfg.adam_beta1, cfg.adam_beta2, cfg.adam_epsilon});
  Rng rng(derive_seed(cfg.seed, kFineTuneStream));
  std::vector<std::size_t> order(task.examples.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  result.epoch_losses.push_back(result.model.evaluate_loss(all));
  std::size_t stalled = 0;
  while (result.epochs < cfg.max_epochs && stalled < cfg.patience) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      LabeledBatch batch;
      for (std::size_t k = start; k < std::min(order.size(), start + cfg.batch_size); ++k) {
        const auto& ex = task.examples[order[k]];
        batch.push(task.campaign, ex.user, ex.label);
      }
      Tape tape;
      BoundParams p = BoundParams::bind(tape, result.model.params());
      adam.step(result.model.params(), grad(result.model.loss(p, batch, cfg.reduction), p));
    }
    ++result.epochs;
    const double previous = result.epoch_losses.back();
    const double current = result.model.evaluate_loss(all);
    result.epoch_losses.push_back(current);
    const double improvement = (previous - current) / std::abs(previous);
    stalled = improvement < cfg.rel_tol ? stalled + 1 : 0;
  }
  return result;
}

std::vector<double> score_candidates(const MetaHeacModel& model, const CampaignRecord& campaign,
                                     std::span<const UserRecord* const> candidates, std::size_t threads) {
  std::vector<double> scores(candidates.size());
  const std::size_t shards = (candidates.size() + kShard - 1) / kShard;
  parallel_for(shards, threads, [&](std::size_t s) {
    const std::size_t begin = s * kShard;
    const std::size_t count = std::min(kShard, candidates.size() - begin);
    auto part = model.predict(campaign, candidates.subspan(begin, count));
    std::copy(part.begin(), part.end(), scores.begin() + static_cast<std::ptrdiff_t>(begin));
  });
  return scores;
}

std::vector<std::size_t> rank_order(std::span<const double> scores, std::span<const std::uint64_t> ids) {
  if (scores.size() != ids.size()) throw ShapeError("rank_order: scores and ids differ in length");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    if (ids[a] != ids[b]) return ids[a] < ids[b];
    return a < b;
  });
  return order;
}

ExpansionResult expand(const MetaHeacModel& model, const CampaignRecord& campaign,
                       std::span<const UserRecord> candidates, std::size_t k, std::size_t threads) {
  if (candidates.empty()) throw ConfigError("expand: empty candidate pool");
  if (k > candidates.size()) {
    throw ConfigError("expand: k = " + std::to_string(k) + " exceeds the candidate pool of " +
                      std::to_string(candidates.size()));
  }
  std::vector<const UserRecord*> ptrs;
  std::vector<std::uint64_t> ids;
  for (const auto& u : candidates) {
    ptrs.push_back(&u);
    ids.push_back(u.id);
  }
  const auto scores = score_candidates(model, campaign, ptrs, threads);
  ExpansionResult out;
  out.k = k;
  for (std::size_t i : rank_order(scores, ids)) out.ranking.push_back({ids[i], scores[i]});
  for (std::size_t i = 0; i < k; ++i) out.selected.push_back(out.ranking[i].id);
  return out;
}

}  // namespace metaheac
