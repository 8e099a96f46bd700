// Copyright 2026 The metaheac Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Straight-line evaluation of one (campaign, user) score with explicit loops,
// reading weights from the model's parameter set by name:
//
//   r = s_n * sum_i w_e[i] h_i(u),   p = s_m * sum_j w_c[j] sigmoid(t_j(r))

#include <cmath>
#include <string>
#include <vector>

#include "metaheac/model.hpp"

namespace oracle {

using Vec = std::vector<double>;

inline Vec lookup_mean(const metaheac::Tensor& table, const std::vector<std::uint32_t>& ids) {
  const std::size_t k = table.cols();
  Vec out(k, 0.0);
  for (auto id : ids) {
    for (std::size_t c = 0; c < k; ++c) out[c] += table.at(id, c);
  }
  for (auto& v : out) v /= static_cast<double>(ids.size());
  return out;
}

/// y = x W + b, with W stored [in, out] row-major.
inline Vec affine(const metaheac::ParamSet& p, const std::string& prefix, std::size_t layer, const Vec& x) {
  const auto& w = p.at(prefix + ".layer" + std::to_string(layer) + ".weight");
  const auto& b = p.at(prefix + ".layer" + std::to_string(layer) + ".bias");
  Vec y(w.cols());
  for (std::size_t o = 0; o < w.cols(); ++o) {
    double s = b[o];
    for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * w.at(i, o);
    y[o] = s;
  }
  return y;
}

inline Vec relu(Vec v) {
  for (auto& x : v) x = x > 0.0 ? x : 0.0;
  return v;
}

inline Vec softmax(const Vec& z) {
  double top = z[0];
  for (double v : z) top = std::max(top, v);
  Vec e(z.size());
  double total = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) total += e[i] = std::exp(z[i] - top);
  for (auto& v : e) v /= total;
  return e;
}

inline double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

struct Reference {
  Vec expert_weights;
  Vec critic_weights;
  Vec representation;
  double prediction = 0.0;
};

inline Reference reference_forward(const metaheac::MetaHeacModel& model, const metaheac::CampaignRecord& campaign,
                                   const metaheac::UserRecord& user) {
  const auto& schema = model.schema();
  const auto& cfg = model.config();
  const auto& p = model.params();

  std::vector<Vec> user_vecs;
  for (std::size_t f = 0; f < schema.user_fields().size(); ++f) {
    user_vecs.push_back(lookup_mean(p.at("emb.user." + schema.user_fields()[f].name), user.values[f]));
  }
  Vec expert_in;
  for (const auto& v : user_vecs) expert_in.insert(expert_in.end(), v.begin(), v.end());

  const bool expert_gate = cfg.ablation == metaheac::Ablation::kFull || cfg.ablation == metaheac::Ablation::kNoHybridCritics;
  const bool critic_gate = cfg.ablation == metaheac::Ablation::kFull || cfg.ablation == metaheac::Ablation::kNoHybridExperts;

  Vec gate_in;
  if (expert_gate || critic_gate) {
    for (std::size_t f = 0; f < schema.campaign_fields().size(); ++f) {
      Vec v = lookup_mean(p.at("emb.campaign." + schema.campaign_fields()[f].name), {campaign.values[f]});
      gate_in.insert(gate_in.end(), v.begin(), v.end());
    }
    Vec mean(cfg.embedding_dim, 0.0);
    for (const auto& v : user_vecs) {
      for (std::size_t c = 0; c < mean.size(); ++c) mean[c] += v[c] / static_cast<double>(user_vecs.size());
    }
    gate_in.insert(gate_in.end(), mean.begin(), mean.end());
  }
  auto gate = [&](const std::string& prefix) {
    Vec h = gate_in;
    for (std::size_t l = 0; l < cfg.gate_hidden.size(); ++l) h = relu(affine(p, prefix, l, h));
    return softmax(affine(p, prefix, cfg.gate_hidden.size(), h));
  };
  auto expert = [&](std::size_t i) {
    Vec h = expert_in;
    for (std::size_t l = 0; l < cfg.expert_hidden.size(); ++l) h = relu(affine(p, "expert." + std::to_string(i), l, h));
    return h;
  };

  Reference out;
  const std::size_t n = expert_gate ? cfg.n_experts : 1;
  const std::size_t m = critic_gate ? cfg.m_critics : 1;
  out.expert_weights = expert_gate ? gate("gate.expert") : Vec{1.0};
  out.critic_weights = critic_gate ? gate("gate.critic") : Vec{1.0};
  const double s_n = expert_gate && cfg.literal_scaling ? 1.0 / static_cast<double>(n) : 1.0;
  const double s_m = critic_gate && cfg.literal_scaling ? 1.0 / static_cast<double>(m) : 1.0;

  out.representation.assign(cfg.expert_hidden.back(), 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    Vec h = expert(i);
    for (std::size_t c = 0; c < h.size(); ++c) out.representation[c] += s_n * out.expert_weights[i] * h[c];
  }
  double pred = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    pred += out.critic_weights[j] * logistic(affine(p, "critic." + std::to_string(j), 0, out.representation)[0]);
  }
  out.prediction = s_m * pred;
  return out;
}

}  // namespace oracle
