// Copyright 2026 The metaheac Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string_view>

#include "metaheac/meta_trainer.hpp"
#include "metaheac/model.hpp"
#include "metaheac/online.hpp"
#include "metaheac/synth.hpp"

namespace metaheac {

/// Every tunable of a run, from a flat `key = value` file plus overrides.
/// Unknown keys are rejected. All randomness derives from `seed`.
///
/// Keys (defaults in parentheses):
///   seed (1), threads (0 = all cores), k_percent (5), threshold (unset: 8:2 rule)
///   model:    n_experts (8), m_critics (5), expert_hidden (64,64), gate_hidden (64),
///             embedding_dim (16), literal_scaling (true), ablation (full|no_he|no_hc|mlp)
///   training: alpha (0.001), beta (0.001), batch_size (512), tasks_per_iter (5), epochs (1),
///             adam_beta1 (0.9), adam_beta2 (0.999), adam_epsilon (1e-8), second_order (true),
///             reduction (mean|sum), mode (meta|joint)
///   finetune: finetune_lr (beta), finetune_max_epochs (50), finetune_rel_tol (0.001),
///             finetune_patience (3), finetune_batch_size (512)
///   synth:    n_tasks, test_tasks, users, latent_dim, seeds_min, seeds_max, noise,
///             negative_ratio, audience_rate, clusters, cluster_spread,
///             campaign_visible_pairs, user_noise_fields, interest_threshold, synth_seed
struct RunConfig {
  std::uint64_t seed = 1;
  std::size_t threads = 0;
  double k_percent = 5.0;
  std::optional<std::size_t> threshold;
  ModelConfig model;
  TrainConfig train;
  FineTuneConfig finetune;
  std::optional<double> finetune_lr;
  SynthConfig synth;
  std::optional<std::uint64_t> synth_seed;

  /// Throws ConfigError naming `source` for unknown keys or bad values.
  void apply(std::string_view key, std::string_view value, std::string_view source = "override");
  void load_file(const std::filesystem::path& path);
  /// `key=value` from the command line.
  void apply_override(std::string_view assignment);

  std::size_t effective_threads() const;
  std::uint64_t model_seed() const;
  TrainConfig train_config() const;
  FineTuneConfig finetune_config() const;
  SynthConfig synth_config() const;

  void write(std::ostream& out) const;
};

}  // namespace metaheac
