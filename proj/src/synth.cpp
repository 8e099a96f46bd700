// Copyright 2026 The metaheac Authors
// SPDX-License-Identifier: Apache-2.0

#include "metaheac/synth.hpp"

#include <algorithm>
#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "metaheac/error.hpp"
#include "metaheac/key_value.hpp"

namespace metaheac {
namespace {

constexpr std::uint32_t kNoiseVocab = 8;

std::size_t pair_count(std::size_t dim) { return (dim + 1) / 2; }

std::uint32_t sign_code(std::span<const double> v, std::size_t pair) {
  const std::size_t a = 2 * pair;
  std::uint32_t code = v[a] > 0.0 ? 1U : 0U;
  if (a + 1 < v.size()) code = code * 2 + (v[a + 1] > 0.0 ? 1U : 0U);
  return code;
}

std::uint32_t pair_vocab(std::size_t dim, std::size_t pair) { return 2 * pair + 1 < dim ? 4U : 2U; }

std::string task_name(const char* prefix, std::size_t i) {
  std::ostringstream os;
  os << prefix << std::setw(4) << std::setfill('0') << i;
  return os.str();
}

}  // namespace

void SynthConfig::validate() const {
  if (n_tasks < 1 || users < 1 || latent_dim < 1) throw ConfigError("synth: n_tasks, users, latent_dim must be >= 1");
  if (test_tasks > n_tasks) throw ConfigError("synth: test_tasks exceeds n_tasks");
  if (seeds_min < 1 || seeds_max < seeds_min) throw ConfigError("synth: need 1 <= seeds_min <= seeds_max");
  if (negative_ratio < 1) throw ConfigError("synth: negative_ratio must be >= 1");
  if (!(noise >= 0.0)) throw ConfigError("synth: noise must be >= 0");
  if (!(audience_rate > 0.0 && audience_rate < 1.0)) throw ConfigError("synth: audience_rate must be in (0, 1)");
  if (clusters < 1) throw ConfigError("synth: clusters must be >= 1");
  if (campaign_visible_pairs > pair_count(latent_dim)) {
    throw ConfigError("synth: campaign_visible_pairs exceeds the number of latent coordinate pairs");
  }
}

SynthDataset generate_synth(const SynthConfig& cfg) {
  cfg.validate();
  const std::size_t d = cfg.latent_dim;
  Rng rng(cfg.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  std::vector<CampaignField> campaign_fields;
  for (std::size_t p = 0; p < cfg.campaign_visible_pairs; ++p) {
    campaign_fields.push_back({"c" + std::to_string(p), pair_vocab(d, p)});
  }
  std::vector<UserField> user_fields;
  for (std::size_t p = 0; p < pair_count(d); ++p) user_fields.push_back({"z" + std::to_string(p), pair_vocab(d, p), false});
  user_fields.push_back({"interests", static_cast<std::uint32_t>(2 * d), true});
  for (std::size_t n = 0; n < cfg.user_noise_fields; ++n) {
    user_fields.push_back({"noise" + std::to_string(n), kNoiseVocab, false});
  }
  SynthDataset out;
  out.schema = FeatureSchema(std::move(campaign_fields), std::move(user_fields));

  // Users.
  std::uniform_int_distribution<std::uint32_t> noise_id(0, kNoiseVocab - 1);
  std::vector<std::vector<double>> latent(cfg.users, std::vector<double>(d));
  std::vector<UserRecord> users(cfg.users);
  for (std::size_t u = 0; u < cfg.users; ++u) {
    auto& z = latent[u];
    for (auto& v : z) v = gauss(rng);
    UserRecord& rec = users[u];
    rec.id = u;
    for (std::size_t p = 0; p < pair_count(d); ++p) rec.values.push_back({sign_code(z, p)});
    std::vector<std::uint32_t> interests;
    for (std::size_t j = 0; j < d; ++j) {
      if (z[j] > cfg.interest_threshold) interests.push_back(static_cast<std::uint32_t>(j));
      if (z[j] < -cfg.interest_threshold) interests.push_back(static_cast<std::uint32_t>(d + j));
    }
    if (interests.empty()) {
      std::size_t strongest = 0;
      for (std::size_t j = 1; j < d; ++j) {
        if (std::abs(z[j]) > std::abs(z[strongest])) strongest = j;
      }
      interests.push_back(static_cast<std::uint32_t>(z[strongest] > 0.0 ? strongest : d + strongest));
    }
    std::sort(interests.begin(), interests.end());
    rec.values.push_back(std::move(interests));
    for (std::size_t n = 0; n < cfg.user_noise_fields; ++n) rec.values.push_back({noise_id(rng)});
  }

  // Cluster centres; the second half mirrors the first.
  std::vector<std::vector<double>> centres(cfg.clusters, std::vector<double>(d));
  const std::size_t half = cfg.clusters / 2;
  for (std::size_t k = 0; k < cfg.clusters; ++k) {
    if (k >= cfg.clusters - half) {
      for (std::size_t j = 0; j < d; ++j) centres[k][j] = -centres[k - (cfg.clusters - half)][j];
    } else {
      for (auto& v : centres[k]) v = gauss(rng);
    }
  }

  // <z, t> ~ N(0, 1) for unit t, so this threshold yields the target audience rate.
  const double bias = boost::math::quantile(boost::math::normal(0.0, 1.0), 1.0 - cfg.audience_rate);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> cluster_pick(0, cfg.clusters - 1);
  std::uniform_int_distribution<std::size_t> seed_size(cfg.seeds_min, cfg.seeds_max);
  std::vector<std::uint64_t> pool_ids(cfg.users);
  for (std::size_t u = 0; u < cfg.users; ++u) pool_ids[u] = u;

  for (std::size_t c = 0; c < cfg.n_tasks; ++c) {
    const bool is_test = c >= cfg.n_tasks - cfg.test_tasks;
    const auto& centre = centres[cluster_pick(rng)];
    std::vector<double> t(d);
    double norm = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      t[j] = centre[j] + cfg.cluster_spread * gauss(rng);
      norm += t[j] * t[j];
    }
    norm = std::sqrt(norm);
    for (auto& v : t) v = norm > 0.0 ? v / norm : 1.0 / std::sqrt(static_cast<double>(d));

    CampaignTask task;
    task.campaign.id = is_test ? task_name("test", c - (cfg.n_tasks - cfg.test_tasks)) : task_name("train", c);
    for (std::size_t p = 0; p < cfg.campaign_visible_pairs; ++p) task.campaign.values.push_back(sign_code(t, p));

    std::vector<bool> actual(cfg.users);
    std::vector<std::uint64_t> positives;
    for (std::size_t u = 0; u < cfg.users; ++u) {
      double score = -bias;
      for (std::size_t j = 0; j < d; ++j) score += latent[u][j] * t[j];
      actual[u] = cfg.noise == 0.0 ? score > 0.0 : unit(rng) < 1.0 / (1.0 + std::exp(-score / cfg.noise));
      if (actual[u]) positives.push_back(u);
    }

    // Seeds: a uniform subset of the actual audience.
    const std::size_t n_seeds = std::min(seed_size(rng), positives.size());
    for (std::size_t i = 0; i < n_seeds; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, positives.size() - 1);
      std::swap(positives[i], positives[pick(rng)]);
    }
    std::vector<std::uint64_t> seeds(positives.begin(), positives.begin() + static_cast<std::ptrdiff_t>(n_seeds));
    std::sort(seeds.begin(), seeds.end());
    std::vector<std::uint64_t> negatives = sample_negatives(pool_ids, seeds, cfg.negative_ratio, rng);
    std::sort(negatives.begin(), negatives.end());

    std::vector<bool> labeled(cfg.users, false);
    for (auto id : seeds) {
      task.examples.push_back({users[id], 1});
      labeled[id] = true;
    }
    for (auto id : negatives) {
      task.examples.push_back({users[id], 0});
      labeled[id] = true;
    }
    if (is_test) {
      for (std::size_t u = 0; u < cfg.users; ++u) {
        if (!labeled[u]) task.eval_pool.push_back({users[u], actual[u]});
      }
      out.test.push_back(std::move(task));
    } else {
      out.train.push_back(std::move(task));
    }
  }
  return out;
}

void write_synth(const std::filesystem::path& dir, const SynthDataset& data) {
  std::filesystem::create_directories(dir / "train");
  std::filesystem::create_directories(dir / "test");
  {
    std::ofstream out(dir / "schema.txt");
    if (!out) throw Error("cannot write '" + (dir / "schema.txt").string() + "'");
    data.schema.write(out);
  }
  for (const auto& t : data.train) save_task(dir / "train" / (t.id() + ".task"), data.schema, t);
  for (const auto& t : data.test) save_task(dir / "test" / (t.id() + ".task"), data.schema, t);
}

bool apply_synth_setting(SynthConfig& c, std::string_view key, std::string_view value) {
  auto as_size = [&](std::size_t& field) { field = parse_uint(value, key); };
  if (key == "n_tasks") as_size(c.n_tasks);
  else if (key == "test_tasks") as_size(c.test_tasks);
  else if (key == "users") as_size(c.users);
  else if (key == "latent_dim") as_size(c.latent_dim);
  else if (key == "seeds_min") as_size(c.seeds_min);
  else if (key == "seeds_max") as_size(c.seeds_max);
  else if (key == "noise") c.noise = parse_double(value, key);
  else if (key == "negative_ratio") as_size(c.negative_ratio);
  else if (key == "audience_rate") c.audience_rate = parse_double(value, key);
  else if (key == "clusters") as_size(c.clusters);
  else if (key == "cluster_spread") c.cluster_spread = parse_double(value, key);
  else if (key == "campaign_visible_pairs") as_size(c.campaign_visible_pairs);
  else if (key == "user_noise_fields") as_size(c.user_noise_fields);
  else if (key == "interest_threshold") c.interest_threshold = parse_double(value, key);
  else if (key == "synth_seed") c.seed = parse_uint(value, key);
  else return false;
  return true;
}

void write_synth_config(std::ostream& out, const SynthConfig& c) {
  out << "n_tasks = " << c.n_tasks << "\ntest_tasks = " << c.test_tasks << "\nusers = " << c.users
      << "\nlatent_dim = " << c.latent_dim << "\nseeds_min = " << c.seeds_min << "\nseeds_max = " << c.seeds_max
      << "\nnoise = " << format_double(c.noise) << "\nnegative_ratio = " << c.negative_ratio
      << "\naudience_rate = " << format_double(c.audience_rate) << "\nclusters = " << c.clusters
      << "\ncluster_spread = " << format_double(c.cluster_spread)
      << "\ncampaign_visible_pairs = " << c.campaign_visible_pairs << "\nuser_noise_fields = " << c.user_noise_fields
      << "\ninterest_threshold = " << format_double(c.interest_threshold) << "\nsynth_seed = " << c.seed << '\n';
}

}  // namespace metaheac
