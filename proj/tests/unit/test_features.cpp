// Copyright 2026 The metaheac Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <sstream>

#include "metaheac/error.hpp"
#include "metaheac/features.hpp"
#include "metaheac/ops.hpp"
#include "support/fixtures.hpp"

using namespace metaheac;

namespace {

struct Embedded {
  ParamSet params;
  FeatureSchema schema = fixtures::small_schema();
  Embedded() {
    Rng rng(1);
    add_embedding_tables(schema, 4, true, rng, params);
  }
  std::vector<Tensor> user_fields(const UserRecord& u) const {
    Tape tape;
    auto p = BoundParams::bind(tape, params, false);
    CampaignRecord c{"c", {0, 0}};
    auto enc = embed_example(schema, p, c, u);
    std::vector<Tensor> out;
    for (const auto& v : enc.user) out.push_back(v.value());
    return out;
  }
  std::vector<double> row(const std::string& field, std::uint32_t r) const {
    const auto& t = params.at("emb.user." + field);
    std::vector<double> out;
    for (std::size_t c = 0; c < t.cols(); ++c) out.push_back(t.at(r, c));
    return out;
  }
};

UserRecord user_with_interests(std::vector<std::uint32_t> ids) { return UserRecord{7, {{1}, std::move(ids), {2}}}; }

}  // namespace

TEST_CASE("multi-valued fields are mean-pooled within the field") {
  Embedded e;
  const auto single = e.user_fields(user_with_interests({4}))[1];
  const auto a = e.row("interests", 4);
  for (std::size_t c = 0; c < 4; ++c) CHECK(single[c] == a[c]);

  CHECK(e.user_fields(user_with_interests({4, 4}))[1] == single);

  const auto pair = e.user_fields(user_with_interests({4, 6}))[1];
  const auto b = e.row("interests", 6);
  for (std::size_t c = 0; c < 4; ++c) CHECK(pair[c] == doctest::Approx((a[c] + b[c]) / 2.0).epsilon(1e-15));

  CHECK(e.user_fields(user_with_interests({6, 4, 1})) == e.user_fields(user_with_interests({1, 4, 6})));
}

TEST_CASE("embedding tables start small and finite") {
  Embedded e;
  for (const auto& entry : e.params) {
    for (double v : entry.value.data()) CHECK(std::abs(v) <= kEmbeddingInitRange);
  }
}

TEST_CASE("out-of-vocabulary ids name the field and id") {
  Embedded e;
  Tape tape;
  auto p = BoundParams::bind(tape, e.params, false);
  UserRecord bad{3, {{1}, {9}, {2}}};
  try {
    (void)embed_example(e.schema, p, CampaignRecord{"c", {0, 0}}, bad);
    FAIL("expected SchemaError");
  } catch (const SchemaError& err) {
    const std::string what = err.what();
    CHECK(what.find("interests") != std::string::npos);
    CHECK(what.find('9') != std::string::npos);
  }
  CHECK_THROWS_AS(validate_campaign(e.schema, CampaignRecord{"c", {5, 0}}), SchemaError);
  CHECK_THROWS_AS(validate_user(e.schema, UserRecord{1, {{1}, {}, {2}}}), SchemaError);
  CHECK_THROWS_AS(validate_user(e.schema, UserRecord{1, {{1, 2}, {3}, {2}}}), SchemaError);
}

TEST_CASE("user_mean") {
  Tape tape;
  const auto v = tape.constant(Tensor::matrix(1, 3, {1.0, -2.0, 0.5}));
  const std::vector<Var> single{v};
  CHECK(user_mean(single).value() == v.value());
  const std::vector<Var> opposite{v, neg(v)};
  for (double x : user_mean(opposite).value().data()) CHECK(x == 0.0);

  Rng rng(4);
  std::uniform_real_distribution<double> d(-1, 1);
  std::vector<Var> three;
  std::vector<std::vector<double>> raw(3, std::vector<double>(5));
  for (auto& r : raw) {
    for (auto& x : r) x = d(rng);
    three.push_back(tape.constant(Tensor::matrix(1, 5, r)));
  }
  const auto m = user_mean(three).value();
  for (std::size_t c = 0; c < 5; ++c) CHECK(m[c] == doctest::Approx((raw[0][c] + raw[1][c] + raw[2][c]) / 3.0).epsilon(1e-14));

  std::vector<Var> permuted{three[2], three[0], three[1]};
  const auto pm = user_mean(permuted).value();
  for (std::size_t c = 0; c < 5; ++c) CHECK(pm[c] == doctest::Approx(m[c]).epsilon(1e-15));

  CHECK_THROWS_AS((void)user_mean(std::vector<Var>{}), ShapeError);
}

TEST_CASE("embedding gradients touch only referenced rows") {
  Embedded e;
  Tape tape;
  auto p = BoundParams::bind(tape, e.params);
  const UserRecord u{1, {{2}, {3, 5}, {0}}};
  auto enc = embed_example(e.schema, p, CampaignRecord{"c", {4, 1}}, u);
  std::vector<Var> all = enc.campaign;
  all.insert(all.end(), enc.user.begin(), enc.user.end());
  auto g = grad(sum_all(concat_cols(all)), p);

  auto touched = [&](const std::string& name) {
    std::vector<std::size_t> rows;
    const auto& t = g.at(name);
    for (std::size_t r = 0; r < t.rows(); ++r) {
      for (std::size_t c = 0; c < t.cols(); ++c) {
        if (t.at(r, c) != 0.0) {
          rows.push_back(r);
          break;
        }
      }
    }
    return rows;
  };
  CHECK(touched("emb.campaign.category") == std::vector<std::size_t>{4});
  CHECK(touched("emb.campaign.region") == std::vector<std::size_t>{1});
  CHECK(touched("emb.user.age") == std::vector<std::size_t>{2});
  CHECK(touched("emb.user.interests") == std::vector<std::size_t>{3, 5});
  CHECK(touched("emb.user.device") == std::vector<std::size_t>{0});
}

TEST_CASE("schema text round trip and validation") {
  const auto s = fixtures::small_schema();
  std::stringstream ss;
  s.write(ss);
  CHECK(FeatureSchema::parse(ss, "mem") == s);

  std::istringstream dup("version = 1\nuser_field = a 3 single\nuser_field = a 2 multi\n");
  CHECK_THROWS_AS((void)FeatureSchema::parse(dup, "dup"), SchemaError);
  std::istringstream zero("version = 1\nuser_field = a 0 single\n");
  CHECK_THROWS_AS((void)FeatureSchema::parse(zero, "zero"), SchemaError);
}
