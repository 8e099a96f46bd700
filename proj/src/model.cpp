// Copyright 2026 The metaheac Authors
// SPDX-License-Identifier: Apache-2.0

#include "metaheac/model.hpp"

#include <cmath>

#include "metaheac/error.hpp"

namespace metaheac {

std::string to_string(Ablation a) {
  switch (a) {
    case Ablation::kFull:
      return "full";
    case Ablation::kNoHybridExperts:
      return "no_he";
    case Ablation::kNoHybridCritics:
      return "no_hc";
    case Ablation::kSingleMlp:
      return "mlp";
  }
  return "full";
}

Ablation parse_ablation(std::string_view text) {
  if (text == "full") return Ablation::kFull;
  if (text == "no_he") return Ablation::kNoHybridExperts;
  if (text == "no_hc") return Ablation::kNoHybridCritics;
  if (text == "mlp") return Ablation::kSingleMlp;
  throw ConfigError("unknown ablation '" + std::string(text) + "' (expected full, no_he, no_hc or mlp)");
}

void ModelConfig::validate() const {
  if (n_experts < 1) throw ConfigError("model: n_experts must be >= 1");
  if (m_critics < 1) throw ConfigError("model: m_critics must be >= 1");
  if (embedding_dim < 1) throw ConfigError("model: embedding_dim must be >= 1");
  if (expert_hidden.empty()) throw ConfigError("model: expert_hidden must list at least one layer");
  if (gate_hidden.empty()) throw ConfigError("model: gate_hidden must list at least one layer");
  for (auto d : expert_hidden) {
    if (d < 1) throw ConfigError("model: expert_hidden sizes must be >= 1");
  }
  for (auto d : gate_hidden) {
    if (d < 1) throw ConfigError("model: gate_hidden sizes must be >= 1");
  }
}

std::string expert_prefix(std::size_t i) { return "expert." + std::to_string(i); }
std::string critic_prefix(std::size_t j) { return "critic." + std::to_string(j); }
std::string layer_weight(const std::string& prefix, std::size_t layer) {
  return prefix + ".layer" + std::to_string(layer) + ".weight";
}
std::string layer_bias(const std::string& prefix, std::size_t layer) {
  return prefix + ".layer" + std::to_string(layer) + ".bias";
}

namespace {

enum class Init { kRelu, kOutput };

void add_dense(ParamSet& params, const std::string& prefix, std::size_t layer, std::size_t in, std::size_t out,
               Init init, Rng& rng) {
  const double bound = init == Init::kRelu ? std::sqrt(6.0 / static_cast<double>(in))
                                           : 1.0 / std::sqrt(static_cast<double>(in));
  std::uniform_real_distribution<double> dist(-bound, bound);
  Tensor w({in, out});
  for (auto& v : w.data()) v = dist(rng);
  params.add(layer_weight(prefix, layer), std::move(w));
  params.add(layer_bias(prefix, layer), Tensor({out}, 0.0));
}

void add_gate(ParamSet& params, const std::string& prefix, std::size_t in, const std::vector<std::size_t>& hidden,
              std::size_t outputs, Rng& rng) {
  std::size_t width = in;
  for (std::size_t l = 0; l < hidden.size(); ++l) {
    add_dense(params, prefix, l, width, hidden[l], Init::kRelu, rng);
    width = hidden[l];
  }
  add_dense(params, prefix, hidden.size(), width, outputs, Init::kOutput, rng);
}

ParamSet build_params(const FeatureSchema& schema, const ModelConfig& config, Rng& rng) {
  config.validate();
  schema.validate();
  ParamSet params;
  const std::size_t k = config.embedding_dim;
  add_embedding_tables(schema, k, config.uses_campaign(), rng, params);

  const std::size_t expert_in = schema.user_fields().size() * k;
  for (std::size_t i = 0; i < config.experts(); ++i) {
    std::size_t width = expert_in;
    for (std::size_t l = 0; l < config.expert_hidden.size(); ++l) {
      add_dense(params, expert_prefix(i), l, width, config.expert_hidden[l], Init::kRelu, rng);
      width = config.expert_hidden[l];
    }
  }
  const std::size_t gate_in = (schema.campaign_fields().size() + 1) * k;
  if (config.has_expert_gate()) add_gate(params, kExpertGatePrefix, gate_in, config.gate_hidden, config.n_experts, rng);
  for (std::size_t j = 0; j < config.critics(); ++j) {
    add_dense(params, critic_prefix(j), 0, config.representation_dim(), 1, Init::kOutput, rng);
  }
  if (config.has_critic_gate()) add_gate(params, kCriticGatePrefix, gate_in, config.gate_hidden, config.m_critics, rng);
  return params;
}

Var dense(const BoundParams& p, const Var& x, const std::string& prefix, std::size_t layer) {
  return add_bias(matmul(x, p[layer_weight(prefix, layer)]), p[layer_bias(prefix, layer)]);
}

}  // namespace

ParamSet MetaHeacModel::layout(const FeatureSchema& schema, const ModelConfig& config) {
  Rng rng(0);
  return build_params(schema, config, rng).zeros_like();
}

MetaHeacModel::MetaHeacModel(FeatureSchema schema, ModelConfig config, ParamSet params)
    : schema_(std::move(schema)), config_(std::move(config)), params_(std::move(params)) {
  if (!params_.congruent(layout(schema_, config_))) {
    throw ConfigError("model: parameters do not match the layout implied by schema and config");
  }
}

MetaHeacModel MetaHeacModel::create(FeatureSchema schema, ModelConfig config, std::uint64_t seed) {
  Rng rng(seed);
  ParamSet params = build_params(schema, config, rng);
  return MetaHeacModel(std::move(schema), std::move(config), std::move(params));
}

EncodedBatch MetaHeacModel::embed(const BoundParams& p, std::span<const CampaignRecord* const> campaigns,
                                  std::span<const UserRecord* const> users) const {
  return embed_batch(schema_, p, campaigns, users, config_.uses_campaign());
}

Var MetaHeacModel::gate(const BoundParams& p, const EncodedBatch& batch, const std::string& prefix) const {
  std::vector<Var> inputs = batch.campaign;
  inputs.push_back(user_mean(batch.user));
  Var h = concat_cols(inputs);
  for (std::size_t l = 0; l < config_.gate_hidden.size(); ++l) h = relu(dense(p, h, prefix, l));
  return softmax_rows(dense(p, h, prefix, config_.gate_hidden.size()));
}

Var MetaHeacModel::expert_gate(const BoundParams& p, const EncodedBatch& batch) const {
  if (!config_.has_expert_gate()) throw ConfigError("model: expert gate is disabled by ablation");
  return gate(p, batch, kExpertGatePrefix);
}

Var MetaHeacModel::critic_gate(const BoundParams& p, const EncodedBatch& batch) const {
  if (!config_.has_critic_gate()) throw ConfigError("model: critic gate is disabled by ablation");
  return gate(p, batch, kCriticGatePrefix);
}

Var MetaHeacModel::expert(const BoundParams& p, const EncodedBatch& batch, std::size_t i) const {
  Var h = concat_cols(batch.user);
  for (std::size_t l = 0; l < config_.expert_hidden.size(); ++l) h = relu(dense(p, h, expert_prefix(i), l));
  return h;
}

Var MetaHeacModel::user_representation(const BoundParams& p, const EncodedBatch& batch,
                                       const Var& gate_weights) const {
  if (!config_.has_expert_gate()) return expert(p, batch, 0);
  const std::size_t width = config_.representation_dim();
  Var input = concat_cols(batch.user);
  Var mix;
  for (std::size_t i = 0; i < config_.n_experts; ++i) {
    Var h = input;
    for (std::size_t l = 0; l < config_.expert_hidden.size(); ++l) h = relu(dense(p, h, expert_prefix(i), l));
    Var weighted = mul(broadcast_cols(slice_cols(gate_weights, i, 1), width), h);
    mix = i == 0 ? weighted : add(mix, weighted);
  }
  if (config_.literal_scaling) mix = scale(mix, 1.0 / static_cast<double>(config_.n_experts));
  return mix;
}

ForwardPass MetaHeacModel::forward(const BoundParams& p, const EncodedBatch& batch) const {
  ForwardPass out;
  if (config_.has_expert_gate()) out.expert_weights = expert_gate(p, batch);
  out.representation = user_representation(p, batch, out.expert_weights);

  std::vector<Var> logits;
  for (std::size_t j = 0; j < config_.critics(); ++j) logits.push_back(dense(p, out.representation, critic_prefix(j), 0));
  out.critic_probs = sigmoid(logits.size() == 1 ? logits[0] : concat_cols(logits));

  if (config_.has_critic_gate()) {
    out.critic_weights = critic_gate(p, batch);
    out.prediction = row_sum(mul(out.critic_weights, out.critic_probs));
    if (config_.literal_scaling) out.prediction = scale(out.prediction, 1.0 / static_cast<double>(config_.m_critics));
  } else {
    out.prediction = out.critic_probs;
  }
  return out;
}

Var MetaHeacModel::loss(const BoundParams& p, const LabeledBatch& batch, Reduction reduction) const {
  EncodedBatch encoded = embed(p, batch.campaigns, batch.users);
  return bce_loss(forward(p, encoded).prediction, batch.labels, reduction);
}

std::vector<double> MetaHeacModel::predict(const CampaignRecord& campaign,
                                           std::span<const UserRecord* const> users) const {
  constexpr std::size_t kChunk = 2048;
  std::vector<double> scores;
  scores.reserve(users.size());
  for (std::size_t begin = 0; begin < users.size(); begin += kChunk) {
    const auto chunk = users.subspan(begin, std::min(kChunk, users.size() - begin));
    Tape tape;
    BoundParams p = BoundParams::bind(tape, params_, false);
    std::vector<const CampaignRecord*> campaigns(chunk.size(), &campaign);
    EncodedBatch encoded = embed(p, campaigns, chunk);
    const Tensor& pred = forward(p, encoded).prediction.value();
    if (!pred.all_finite()) throw NonFiniteError("prediction", "predict: non-finite score");
    scores.insert(scores.end(), pred.data().begin(), pred.data().end());
  }
  return scores;
}

double MetaHeacModel::predict(const CampaignRecord& campaign, const UserRecord& user) const {
  const UserRecord* u = &user;
  return predict(campaign, std::span(&u, 1)).front();
}

double MetaHeacModel::evaluate_loss(const LabeledBatch& batch, Reduction reduction) const {
  Tape tape;
  BoundParams p = BoundParams::bind(tape, params_, false);
  return loss(p, batch, reduction).value().item();
}

}  // namespace metaheac
