// Copyright 2026 The metaheac Authors
// SPDX-License-Identifier: Apache-2.0

#include "metaheac/features.hpp"

#include <fstream>
#include <memory>
#include <ostream>
#include <set>

#include "metaheac/error.hpp"
#include "metaheac/key_value.hpp"
#include "metaheac/ops.hpp"

namespace metaheac {

FeatureSchema::FeatureSchema(std::vector<CampaignField> campaign_fields, std::vector<UserField> user_fields)
    : campaign_(std::move(campaign_fields)), user_(std::move(user_fields)) {
  validate();
}

void FeatureSchema::validate() const {
  std::set<std::string> names;
  auto check = [&](const std::string& name, std::uint32_t vocab, const char* kind) {
    if (name.empty() || name.find_first_of(" \t:,=") != std::string::npos) {
      throw SchemaError(std::string("schema: invalid ") + kind + " field name '" + name + "'");
    }
    if (!names.insert(name).second) throw SchemaError("schema: duplicate field name '" + name + "'");
    if (vocab < 1) throw SchemaError("schema: field '" + name + "' has empty vocabulary");
  };
  for (const auto& f : campaign_) check(f.name, f.vocab, "campaign");
  for (const auto& f : user_) check(f.name, f.vocab, "user");
  if (user_.empty()) throw SchemaError("schema: at least one user field is required");
}

void FeatureSchema::write(std::ostream& out) const {
  out << "# feature schema\nversion = 1\n";
  for (const auto& f : campaign_) out << "campaign_field = " << f.name << ' ' << f.vocab << '\n';
  for (const auto& f : user_) {
    out << "user_field = " << f.name << ' ' << f.vocab << ' ' << (f.multi_valued ? "multi" : "single") << '\n';
  }
}

FeatureSchema FeatureSchema::parse(std::istream& in, std::string_view source) {
  std::vector<CampaignField> campaign;
  std::vector<UserField> user;
  for (const auto& kv : parse_key_values(in, source)) {
    const std::string where = std::string(source) + ":" + std::to_string(kv.line);
    std::vector<std::string_view> parts;
    for (auto p : split(kv.value, ' ')) {
      if (!trim(p).empty()) parts.push_back(trim(p));
    }
    if (kv.key == "version") {
      if (kv.value != "1") throw SchemaError(where + ": unsupported schema version " + kv.value);
    } else if (kv.key == "campaign_field") {
      if (parts.size() != 2) throw SchemaError(where + ": expected 'campaign_field = <name> <vocab>'");
      campaign.push_back({std::string(parts[0]), static_cast<std::uint32_t>(parse_uint(parts[1], where))});
    } else if (kv.key == "user_field") {
      if (parts.size() != 3 || (parts[2] != "single" && parts[2] != "multi")) {
        throw SchemaError(where + ": expected 'user_field = <name> <vocab> single|multi'");
      }
      user.push_back(
          {std::string(parts[0]), static_cast<std::uint32_t>(parse_uint(parts[1], where)), parts[2] == "multi"});
    } else {
      throw SchemaError(where + ": unknown schema key '" + kv.key + "'");
    }
  }
  return FeatureSchema(std::move(campaign), std::move(user));
}

FeatureSchema FeatureSchema::read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open schema file '" + path + "'");
  return parse(in, path);
}

void validate_campaign(const FeatureSchema& schema, const CampaignRecord& campaign) {
  const auto& fields = schema.campaign_fields();
  if (campaign.values.size() != fields.size()) {
    throw SchemaError("campaign '" + campaign.id + "': expected " + std::to_string(fields.size()) + " fields, got " +
                      std::to_string(campaign.values.size()));
  }
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (campaign.values[i] >= fields[i].vocab) {
      throw SchemaError("campaign field '" + fields[i].name + "': id " + std::to_string(campaign.values[i]) +
                        " out of vocabulary (size " + std::to_string(fields[i].vocab) + ")");
    }
  }
}

void validate_user(const FeatureSchema& schema, const UserRecord& user) {
  const auto& fields = schema.user_fields();
  if (user.values.size() != fields.size()) {
    throw SchemaError("user " + std::to_string(user.id) + ": expected " + std::to_string(fields.size()) +
                      " fields, got " + std::to_string(user.values.size()));
  }
  for (std::size_t i = 0; i < fields.size(); ++i) {
    const auto& ids = user.values[i];
    if (ids.empty()) throw SchemaError("user field '" + fields[i].name + "': no value");
    if (!fields[i].multi_valued && ids.size() != 1) {
      throw SchemaError("user field '" + fields[i].name + "' is single-valued but has " +
                        std::to_string(ids.size()) + " values");
    }
    for (auto id : ids) {
      if (id >= fields[i].vocab) {
        throw SchemaError("user field '" + fields[i].name + "': id " + std::to_string(id) +
                          " out of vocabulary (size " + std::to_string(fields[i].vocab) + ")");
      }
    }
  }
}

std::string campaign_embedding_name(const CampaignField& field) { return "emb.campaign." + field.name; }
std::string user_embedding_name(const UserField& field) { return "emb.user." + field.name; }

void add_embedding_tables(const FeatureSchema& schema, std::size_t k, bool with_campaign, Rng& rng,
                          ParamSet& params) {
  std::uniform_real_distribution<double> init(-kEmbeddingInitRange, kEmbeddingInitRange);
  auto table = [&](std::uint32_t vocab) {
    Tensor t({vocab, k});
    for (auto& v : t.data()) v = init(rng);
    return t;
  };
  if (with_campaign) {
    for (const auto& f : schema.campaign_fields()) params.add(campaign_embedding_name(f), table(f.vocab));
  }
  for (const auto& f : schema.user_fields()) params.add(user_embedding_name(f), table(f.vocab));
}

EncodedBatch embed_batch(const FeatureSchema& schema, const BoundParams& params,
                         std::span<const CampaignRecord* const> campaigns, std::span<const UserRecord* const> users,
                         bool with_campaign) {
  if (campaigns.size() != users.size()) throw ShapeError("embed_batch: campaign/user count mismatch");
  if (users.empty()) throw ShapeError("embed_batch: empty batch");
  EncodedBatch out;
  out.size = users.size();

  if (with_campaign) {
    for (const auto* c : campaigns) validate_campaign(schema, *c);
    const auto& fields = schema.campaign_fields();
    for (std::size_t f = 0; f < fields.size(); ++f) {
      auto bags = std::make_shared<Bags>();
      for (const auto* c : campaigns) bags->push(std::span<const std::uint32_t>(&c->values[f], 1));
      out.campaign.push_back(embedding_bag(params[campaign_embedding_name(fields[f])], std::move(bags)));
    }
  }

  for (const auto* u : users) validate_user(schema, *u);
  const auto& fields = schema.user_fields();
  for (std::size_t f = 0; f < fields.size(); ++f) {
    auto bags = std::make_shared<Bags>();
    for (const auto* u : users) bags->push(u->values[f]);
    out.user.push_back(embedding_bag(params[user_embedding_name(fields[f])], std::move(bags)));
  }
  return out;
}

EncodedBatch embed_example(const FeatureSchema& schema, const BoundParams& params, const CampaignRecord& campaign,
                           const UserRecord& user, bool with_campaign) {
  const CampaignRecord* c = &campaign;
  const UserRecord* u = &user;
  return embed_batch(schema, params, std::span(&c, 1), std::span(&u, 1), with_campaign);
}

Var user_mean(std::span<const Var> user_emb) {
  if (user_emb.empty()) throw ShapeError("user_mean: no user field vectors (M = 0)");
  return mean_of(user_emb);
}

}  // namespace metaheac
