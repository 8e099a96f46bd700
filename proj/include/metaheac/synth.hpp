// Copyright 2026 The metaheac Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "metaheac/data_io.hpp"

namespace metaheac {

/// Synthetic multi-campaign generator.
///
/// Users carry latent vectors z_u ~ N(0, I_d); campaigns carry unit latent
/// vectors t_c drawn around cluster centres, where the second half of the
/// centres are negations of the first (conflicting campaigns). A user belongs
/// to the audience of c with probability sigmoid((<z_u, t_c> - b) / noise);
/// noise = 0 makes membership the deterministic sign of <z_u, t_c> - b, and b
/// is chosen so that the expected audience fraction equals `audience_rate`.
///
/// Categorical features come from sign-quantizing latent coordinates in pairs
/// (vocabulary 4, or 2 for a trailing odd coordinate). Users also get a
/// multi-valued "interests" field listing strongly positive / negative
/// coordinates and `user_noise_fields` uninformative fields. Campaigns expose
/// only their first `campaign_visible_pairs` coordinate pairs.
struct SynthConfig {
  std::size_t n_tasks = 50;
  std::size_t test_tasks = 10;
  std::size_t users = 2000;
  std::size_t latent_dim = 8;
  std::size_t seeds_min = 10;
  std::size_t seeds_max = 150;
  double noise = 0.5;
  std::size_t negative_ratio = 10;
  double audience_rate = 0.5;
  std::size_t clusters = 4;
  double cluster_spread = 0.5;
  std::size_t campaign_visible_pairs = 4;
  std::size_t user_noise_fields = 1;
  double interest_threshold = 0.5;
  std::uint64_t seed = 1;

  void validate() const;
};

struct SynthDataset {
  FeatureSchema schema;
  std::vector<CampaignTask> train;
  std::vector<CampaignTask> test;  // carry evaluation pools
};

SynthDataset generate_synth(const SynthConfig& config);

/// Writes `schema.txt`, `train/*.task` and `test/*.task` under `dir`.
void write_synth(const std::filesystem::path& dir, const SynthDataset& data);

/// Applies one `key = value` setting; returns false if the key is unknown.
bool apply_synth_setting(SynthConfig& config, std::string_view key, std::string_view value);
void write_synth_config(std::ostream& out, const SynthConfig& config);

}  // namespace metaheac
