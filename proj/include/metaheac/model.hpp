// Copyright 2026 The metaheac Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "metaheac/features.hpp"
#include "metaheac/ops.hpp"
#include "metaheac/param_set.hpp"

namespace metaheac {

enum class Ablation {
  kFull,
  kNoHybridExperts,  // single expert, no expert gate
  kNoHybridCritics,  // single critic, no critic gate
  kSingleMlp,        // both: a plain embedding + MLP(hidden..., 1) classifier
};

std::string to_string(Ablation a);
Ablation parse_ablation(std::string_view text);

struct ModelConfig {
  std::size_t n_experts = 8;
  std::size_t m_critics = 5;
  std::vector<std::size_t> expert_hidden{64, 64};
  std::vector<std::size_t> gate_hidden{64};
  std::size_t embedding_dim = 16;
  /// Keep the 1/n and 1/m averaging factors on the gated sums.
  bool literal_scaling = true;
  Ablation ablation = Ablation::kFull;

  bool has_expert_gate() const { return ablation == Ablation::kFull || ablation == Ablation::kNoHybridCritics; }
  bool has_critic_gate() const { return ablation == Ablation::kFull || ablation == Ablation::kNoHybridExperts; }
  bool uses_campaign() const { return has_expert_gate() || has_critic_gate(); }
  std::size_t experts() const { return has_expert_gate() ? n_experts : 1; }
  std::size_t critics() const { return has_critic_gate() ? m_critics : 1; }
  std::size_t representation_dim() const { return expert_hidden.back(); }

  /// Throws ConfigError on empty layer lists or zero sizes.
  void validate() const;
  bool operator==(const ModelConfig&) const = default;
};

/// Training examples referencing records owned elsewhere.
struct LabeledBatch {
  std::vector<const CampaignRecord*> campaigns;
  std::vector<const UserRecord*> users;
  std::vector<double> labels;

  std::size_t size() const noexcept { return users.size(); }
  void push(const CampaignRecord& c, const UserRecord& u, double label) {
    campaigns.push_back(&c);
    users.push_back(&u);
    labels.push_back(label);
  }
};

/// Intermediate values of one forward pass. Gate weights are invalid vars
/// when the corresponding gate is ablated.
struct ForwardPass {
  Var expert_weights;  // [B, n]
  Var critic_weights;  // [B, m]
  Var representation;  // [B, H]
  Var critic_probs;    // [B, m] sigmoid outputs of each critic
  Var prediction;      // [B, 1]
};

/// Hybrid experts with a task-driven gate feeding hybrid critics mixed by a
/// second, independent task-driven gate:
///
///   w_e = softmax(g_e([c_1..c_N, mean(u)]))        r = s_n * sum_i w_e[i] h_i(u)
///   w_c = softmax(g_c([c_1..c_N, mean(u)]))        p = s_m * sum_j w_c[j] sigmoid(t_j(r))
///
/// where s_n = 1/n and s_m = 1/m under literal scaling, 1 otherwise, and the
/// experts see the user field vectors concatenated in schema order.
class MetaHeacModel {
 public:
  MetaHeacModel(FeatureSchema schema, ModelConfig config, ParamSet params);

  /// Fresh model: embeddings uniform in [-0.01, 0.01], ReLU layers with
  /// Kaiming-uniform weights, output layers uniform in +-1/sqrt(fan_in),
  /// zero biases. Deterministic in `seed`.
  static MetaHeacModel create(FeatureSchema schema, ModelConfig config, std::uint64_t seed);

  /// Parameter names and shapes implied by schema and config, in storage order.
  static ParamSet layout(const FeatureSchema& schema, const ModelConfig& config);

  const FeatureSchema& schema() const noexcept { return schema_; }
  const ModelConfig& config() const noexcept { return config_; }
  const ParamSet& params() const noexcept { return params_; }
  ParamSet& params() noexcept { return params_; }

  EncodedBatch embed(const BoundParams& p, std::span<const CampaignRecord* const> campaigns,
                     std::span<const UserRecord* const> users) const;

  Var expert_gate(const BoundParams& p, const EncodedBatch& batch) const;
  Var critic_gate(const BoundParams& p, const EncodedBatch& batch) const;
  /// Output of expert i on the batch, [B, H].
  Var expert(const BoundParams& p, const EncodedBatch& batch, std::size_t i) const;
  /// Gate-weighted expert mix; `gate_weights` is ignored without an expert gate.
  Var user_representation(const BoundParams& p, const EncodedBatch& batch, const Var& gate_weights) const;

  ForwardPass forward(const BoundParams& p, const EncodedBatch& batch) const;

  /// BCE of the batch predictions under parameters `p`.
  Var loss(const BoundParams& p, const LabeledBatch& batch, Reduction reduction = Reduction::kMean) const;

  /// Scores users for one campaign without recording gradients.
  std::vector<double> predict(const CampaignRecord& campaign, std::span<const UserRecord* const> users) const;
  double predict(const CampaignRecord& campaign, const UserRecord& user) const;

  /// Mean loss over a batch at the current parameters (no gradient).
  double evaluate_loss(const LabeledBatch& batch, Reduction reduction = Reduction::kMean) const;

 private:
  Var gate(const BoundParams& p, const EncodedBatch& batch, const std::string& prefix) const;

  FeatureSchema schema_;
  ModelConfig config_;
  ParamSet params_;
};

// Parameter-name helpers shared with serialization and tests.
std::string expert_prefix(std::size_t i);
std::string critic_prefix(std::size_t j);
inline const std::string kExpertGatePrefix = "gate.expert";
inline const std::string kCriticGatePrefix = "gate.critic";
std::string layer_weight(const std::string& prefix, std::size_t layer);
std::string layer_bias(const std::string& prefix, std::size_t layer);

}  // namespace metaheac
