// Copyright 2026 The metaheac Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "metaheac/param_set.hpp"
#include "metaheac/rng.hpp"

namespace metaheac {

struct CampaignField {
  std::string name;
  std::uint32_t vocab = 1;
  bool operator==(const CampaignField&) const = default;
};

struct UserField {
  std::string name;
  std::uint32_t vocab = 1;
  bool multi_valued = false;
  bool operator==(const UserField&) const = default;
};

/// Ordered categorical fields of campaigns (N of them) and users (M of them).
class FeatureSchema {
 public:
  FeatureSchema() = default;
  FeatureSchema(std::vector<CampaignField> campaign_fields, std::vector<UserField> user_fields);

  const std::vector<CampaignField>& campaign_fields() const noexcept { return campaign_; }
  const std::vector<UserField>& user_fields() const noexcept { return user_; }

  /// Throws SchemaError on duplicate names, zero vocabularies or no user fields.
  void validate() const;

  /// Key-value text: `campaign_field = <name> <vocab>` and
  /// `user_field = <name> <vocab> single|multi`, one line each, in order.
  void write(std::ostream& out) const;
  static FeatureSchema parse(std::istream& in, std::string_view source);
  static FeatureSchema read_file(const std::string& path);

  bool operator==(const FeatureSchema&) const = default;

 private:
  std::vector<CampaignField> campaign_;
  std::vector<UserField> user_;
};

/// One id per campaign field, in schema order.
struct CampaignRecord {
  std::string id;
  std::vector<std::uint32_t> values;
  bool operator==(const CampaignRecord&) const = default;
};

/// One id list per user field, in schema order. Single-valued fields hold
/// exactly one id; multi-valued fields hold one or more.
struct UserRecord {
  std::uint64_t id = 0;
  std::vector<std::vector<std::uint32_t>> values;
  bool operator==(const UserRecord&) const = default;
};

void validate_campaign(const FeatureSchema& schema, const CampaignRecord& campaign);
void validate_user(const FeatureSchema& schema, const UserRecord& user);

// Parameter names of the per-field embedding matrices ([vocab, k] each).
std::string campaign_embedding_name(const CampaignField& field);
std::string user_embedding_name(const UserField& field);

/// Adds one [vocab, k] matrix per field, uniform in [-0.01, 0.01].
/// Campaign tables are skipped when `with_campaign` is false.
void add_embedding_tables(const FeatureSchema& schema, std::size_t k, bool with_campaign, Rng& rng,
                          ParamSet& params);

inline constexpr double kEmbeddingInitRange = 0.01;

/// Per-field embeddings for a batch of (campaign, user) pairs. Each entry is
/// a [B, k] var; multi-valued user fields are mean-pooled within the field.
struct EncodedBatch {
  std::vector<Var> campaign;  // N entries (empty when the model has no campaign tables)
  std::vector<Var> user;      // M entries
  std::size_t size = 0;
};

/// Embeds campaigns[i] paired with users[i]. Ids are checked against the
/// schema; an out-of-vocabulary id throws SchemaError naming field and id.
EncodedBatch embed_batch(const FeatureSchema& schema, const BoundParams& params,
                         std::span<const CampaignRecord* const> campaigns, std::span<const UserRecord* const> users,
                         bool with_campaign = true);

EncodedBatch embed_example(const FeatureSchema& schema, const BoundParams& params, const CampaignRecord& campaign,
                           const UserRecord& user, bool with_campaign = true);

/// Mean over the M user field vectors. Throws ShapeError when M = 0.
Var user_mean(std::span<const Var> user_emb);

}  // namespace metaheac
