// Copyright 2026 The metaheac Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "metaheac/features.hpp"
#include "metaheac/rng.hpp"

namespace metaheac {

struct LabeledUser {
  UserRecord user;
  int label = 0;
  bool operator==(const LabeledUser&) const = default;
};

struct PoolUser {
  UserRecord user;
  bool actual = false;  // ground-truth member of the campaign's audience
  bool operator==(const PoolUser&) const = default;
};

/// One campaign: its features, the labeled training set D_c (seeds are the
/// positives) and an optional held-out evaluation pool.
struct CampaignTask {
  CampaignRecord campaign;
  std::vector<LabeledUser> examples;
  std::vector<PoolUser> eval_pool;

  const std::string& id() const noexcept { return campaign.id; }
  std::size_t seed_count() const;
  std::size_t negative_count() const { return examples.size() - seed_count(); }
  bool operator==(const CampaignTask&) const = default;
};

// Task file (UTF-8 text, '\n' line endings, fields separated by one TAB):
//
//   campaign <id> <cfield>:<id> ...            first line, every campaign field in schema order
//   <label> <user id> <ufield>:<id>[,<id>...]  one labeled example per line, label 0 or 1
//   #eval                                      optional; starts the evaluation pool
//   <actual> <user id> <ufield>:<ids> ...      one pool user per line, actual 0 or 1
//
// Candidate file: the same layout with a `candidates <id> ...` header and
// `<user id> <ufield>:<ids> ...` lines.

void write_task(std::ostream& out, const FeatureSchema& schema, const CampaignTask& task);
CampaignTask read_task(std::istream& in, const FeatureSchema& schema, std::string_view source);

void save_task(const std::filesystem::path& path, const FeatureSchema& schema, const CampaignTask& task);
CampaignTask load_task(const std::filesystem::path& path, const FeatureSchema& schema);

/// Loads every `*.task` file of `dir` in filename order. Throws SchemaError
/// naming file and line on malformed content, and when no task file exists.
std::vector<CampaignTask> load_tasks(const std::filesystem::path& dir, const FeatureSchema& schema,
                                     std::size_t threads = 1);

struct TaskSummary {
  std::size_t tasks = 0;
  std::size_t seeds = 0;
  std::size_t negatives = 0;
  std::size_t eval_users = 0;
  std::size_t actual_audience = 0;
};
TaskSummary summarize(std::span<const CampaignTask> tasks);

/// Candidates to score for one campaign.
struct CandidateSet {
  CampaignRecord campaign;
  std::vector<UserRecord> users;
};

void write_candidates(std::ostream& out, const FeatureSchema& schema, const CandidateSet& candidates);
/// Reads a candidate file, or a task file whose evaluation pool becomes the candidates.
CandidateSet load_candidates(const std::filesystem::path& path, const FeatureSchema& schema);

/// Locates `schema.txt` in `dir` or its parent.
FeatureSchema find_schema(const std::filesystem::path& dir);

/// Uniform draw without replacement from pool \ seeds of
/// min(ratio * |seeds|, |pool \ seeds|) user ids, in draw order.
/// Throws ConfigError when the pool is smaller than the seed set.
std::vector<std::uint64_t> sample_negatives(std::span<const std::uint64_t> pool,
                                            std::span<const std::uint64_t> seeds, std::size_t ratio, Rng& rng);

}  // namespace metaheac
