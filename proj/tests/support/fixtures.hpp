// Copyright 2026 The metaheac Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <random>
#include <string>

#include "metaheac/data_io.hpp"
#include "metaheac/features.hpp"
#include "metaheac/model.hpp"

namespace fixtures {

using namespace metaheac;

inline FeatureSchema small_schema() {
  return FeatureSchema({{"category", 5}, {"region", 3}},
                       {{"age", 6, false}, {"interests", 9, true}, {"device", 4, false}});
}

inline CampaignRecord random_campaign(const FeatureSchema& s, Rng& rng, std::string id = "c") {
  CampaignRecord c{std::move(id), {}};
  for (const auto& f : s.campaign_fields()) c.values.push_back(std::uniform_int_distribution<std::uint32_t>(0, f.vocab - 1)(rng));
  return c;
}

inline UserRecord random_user(const FeatureSchema& s, Rng& rng, std::uint64_t id = 0) {
  UserRecord u{id, {}};
  for (const auto& f : s.user_fields()) {
    std::uniform_int_distribution<std::uint32_t> pick(0, f.vocab - 1);
    std::vector<std::uint32_t> ids{pick(rng)};
    if (f.multi_valued) {
      const auto extra = std::uniform_int_distribution<int>(0, 3)(rng);
      for (int i = 0; i < extra; ++i) ids.push_back(pick(rng));
    }
    u.values.push_back(std::move(ids));
  }
  return u;
}

/// Weights redrawn uniformly in [-scale, scale] so every path carries signal.
inline void randomize(ParamSet& params, Rng& rng, double scale = 0.5) {
  std::uniform_real_distribution<double> dist(-scale, scale);
  for (auto& e : params) {
    for (auto& v : e.value.data()) v = dist(rng);
  }
}

inline CampaignTask random_task(const FeatureSchema& s, Rng& rng, std::size_t seeds, std::size_t negatives,
                                std::size_t pool = 0, std::string id = "task") {
  CampaignTask t;
  t.campaign = random_campaign(s, rng, std::move(id));
  std::uint64_t uid = 0;
  for (std::size_t i = 0; i < seeds; ++i) t.examples.push_back({random_user(s, rng, uid++), 1});
  for (std::size_t i = 0; i < negatives; ++i) t.examples.push_back({random_user(s, rng, uid++), 0});
  for (std::size_t i = 0; i < pool; ++i) t.eval_pool.push_back({random_user(s, rng, uid++), i % 3 == 0});
  return t;
}

/// Fresh directory under the build tree's temp area, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& name)
      : path_(std::filesystem::temp_directory_path() / ("metaheac_test_" + name)) {
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() { std::filesystem::remove_all(path_); }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace fixtures
