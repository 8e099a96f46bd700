// Copyright 2026 The metaheac Authors
// SPDX-License-Identifier: Apache-2.0

#include "metaheac/data_io.hpp"

#include <algorithm>
#include <fstream>
#include <ostream>
#include <unordered_set>

#include "metaheac/error.hpp"
#include "metaheac/key_value.hpp"
#include "metaheac/parallel.hpp"

namespace metaheac {
namespace {

void write_user_fields(std::ostream& out, const FeatureSchema& schema, const UserRecord& user) {
  const auto& fields = schema.user_fields();
  for (std::size_t f = 0; f < fields.size(); ++f) {
    out << '\t' << fields[f].name << ':';
    for (std::size_t i = 0; i < user.values[f].size(); ++i) {
      if (i) out << ',';
      out << user.values[f][i];
    }
  }
}

void write_campaign_fields(std::ostream& out, const FeatureSchema& schema, const CampaignRecord& campaign) {
  const auto& fields = schema.campaign_fields();
  for (std::size_t f = 0; f < fields.size(); ++f) out << '\t' << fields[f].name << ':' << campaign.values[f];
}

class LineReader {
 public:
  LineReader(std::istream& in, std::string_view source) : in_(in), source_(source) {}

  bool next() {
    if (!std::getline(in_, line_)) return false;
    ++line_no_;
    if (!line_.empty() && line_.back() == '\r') line_.pop_back();
    return true;
  }
  const std::string& line() const { return line_; }

  [[noreturn]] void fail(const std::string& msg) const {
    throw SchemaError(std::string(source_) + ":" + std::to_string(line_no_) + ": " + msg);
  }

  std::uint32_t parse_id(std::string_view text) const {
    std::uint64_t v = 0;
    try {
      v = parse_uint(text, "id");
    } catch (const ConfigError&) {
      fail("bad feature id '" + std::string(text) + "'");
    }
    if (v > 0xffffffffULL) fail("feature id out of range");
    return static_cast<std::uint32_t>(v);
  }

  std::uint64_t parse_user_id(std::string_view text) const {
    try {
      return parse_uint(text, "user id");
    } catch (const ConfigError&) {
      fail("bad user id '" + std::string(text) + "'");
    }
  }

  // "<name>:<ids>" with the expected field name.
  std::string_view field_value(std::string_view token, const std::string& expected) const {
    const auto colon = token.find(':');
    if (colon == std::string_view::npos || token.substr(0, colon) != expected) {
      fail("expected field '" + expected + "', got '" + std::string(token) + "'");
    }
    return token.substr(colon + 1);
  }

  CampaignRecord campaign(std::span<const std::string_view> tokens, const FeatureSchema& schema) const {
    const auto& fields = schema.campaign_fields();
    if (tokens.size() != fields.size() + 2) fail("campaign header has wrong number of fields");
    CampaignRecord c;
    c.id = std::string(tokens[1]);
    if (c.id.empty()) fail("empty campaign id");
    for (std::size_t f = 0; f < fields.size(); ++f) {
      c.values.push_back(parse_id(field_value(tokens[f + 2], fields[f].name)));
    }
    try {
      validate_campaign(schema, c);
    } catch (const SchemaError& e) {
      fail(e.what());
    }
    return c;
  }

  UserRecord user(std::span<const std::string_view> tokens, const FeatureSchema& schema) const {
    const auto& fields = schema.user_fields();
    if (tokens.size() != fields.size() + 1) fail("user line has wrong number of fields");
    UserRecord u;
    u.id = parse_user_id(tokens[0]);
    for (std::size_t f = 0; f < fields.size(); ++f) {
      std::vector<std::uint32_t> ids;
      for (auto part : split(field_value(tokens[f + 1], fields[f].name), ',')) ids.push_back(parse_id(part));
      u.values.push_back(std::move(ids));
    }
    try {
      validate_user(schema, u);
    } catch (const SchemaError& e) {
      fail(e.what());
    }
    return u;
  }

  int flag(std::string_view token) const {
    if (token == "0") return 0;
    if (token == "1") return 1;
    fail("expected label 0 or 1, got '" + std::string(token) + "'");
  }

 private:
  std::istream& in_;
  std::string_view source_;
  std::string line_;
  std::size_t line_no_ = 0;
};

}  // namespace

std::size_t CampaignTask::seed_count() const {
  return static_cast<std::size_t>(
      std::count_if(examples.begin(), examples.end(), [](const LabeledUser& e) { return e.label == 1; }));
}

void write_task(std::ostream& out, const FeatureSchema& schema, const CampaignTask& task) {
  out << "campaign\t" << task.campaign.id;
  write_campaign_fields(out, schema, task.campaign);
  out << '\n';
  for (const auto& e : task.examples) {
    out << e.label << '\t' << e.user.id;
    write_user_fields(out, schema, e.user);
    out << '\n';
  }
  if (!task.eval_pool.empty()) {
    out << "#eval\n";
    for (const auto& p : task.eval_pool) {
      out << (p.actual ? 1 : 0) << '\t' << p.user.id;
      write_user_fields(out, schema, p.user);
      out << '\n';
    }
  }
}

CampaignTask read_task(std::istream& in, const FeatureSchema& schema, std::string_view source) {
  LineReader reader(in, source);
  if (!reader.next()) reader.fail("empty task file");
  CampaignTask task;
  {
    auto tokens = split(reader.line(), '\t');
    if (tokens[0] != "campaign") reader.fail("first line must be the campaign header");
    task.campaign = reader.campaign(tokens, schema);
  }
  bool in_eval = false;
  while (reader.next()) {
    if (reader.line() == "#eval") {
      if (in_eval) reader.fail("duplicate #eval section");
      in_eval = true;
      continue;
    }
    auto tokens = split(reader.line(), '\t');
    if (tokens.size() < 2) reader.fail("malformed line");
    const int flag = reader.flag(tokens[0]);
    UserRecord user = reader.user(std::span(tokens).subspan(1), schema);
    if (in_eval) {
      task.eval_pool.push_back(PoolUser{std::move(user), flag == 1});
    } else {
      task.examples.push_back(LabeledUser{std::move(user), flag});
    }
  }
  return task;
}

void save_task(const std::filesystem::path& path, const FeatureSchema& schema, const CampaignTask& task) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write task file '" + path.string() + "'");
  write_task(out, schema, task);
}

CampaignTask load_task(const std::filesystem::path& path, const FeatureSchema& schema) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SchemaError("cannot open task file '" + path.string() + "'");
  return read_task(in, schema, path.string());
}

std::vector<CampaignTask> load_tasks(const std::filesystem::path& dir, const FeatureSchema& schema,
                                     std::size_t threads) {
  if (!std::filesystem::is_directory(dir)) throw SchemaError("task directory '" + dir.string() + "' not found");
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".task") files.push_back(entry.path());
  }
  if (files.empty()) throw SchemaError("no .task files in '" + dir.string() + "'");
  std::sort(files.begin(), files.end());
  std::vector<CampaignTask> tasks(files.size());
  parallel_for(files.size(), threads, [&](std::size_t i) { tasks[i] = load_task(files[i], schema); });
  return tasks;
}

TaskSummary summarize(std::span<const CampaignTask> tasks) {
  TaskSummary s;
  s.tasks = tasks.size();
  for (const auto& t : tasks) {
    s.seeds += t.seed_count();
    s.negatives += t.negative_count();
    s.eval_users += t.eval_pool.size();
    for (const auto& p : t.eval_pool) s.actual_audience += p.actual ? 1 : 0;
  }
  return s;
}

void write_candidates(std::ostream& out, const FeatureSchema& schema, const CandidateSet& candidates) {
  out << "candidates\t" << candidates.campaign.id;
  write_campaign_fields(out, schema, candidates.campaign);
  out << '\n';
  for (const auto& u : candidates.users) {
    out << u.id;
    write_user_fields(out, schema, u);
    out << '\n';
  }
}

CandidateSet load_candidates(const std::filesystem::path& path, const FeatureSchema& schema) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SchemaError("cannot open candidate file '" + path.string() + "'");
  std::string first;
  std::getline(in, first);
  if (first.rfind("campaign\t", 0) == 0) {
    in.clear();
    in.seekg(0);
    CampaignTask task = read_task(in, schema, path.string());
    CandidateSet out{std::move(task.campaign), {}};
    for (auto& p : task.eval_pool) out.users.push_back(std::move(p.user));
    return out;
  }
  in.clear();
  in.seekg(0);
  const std::string source = path.string();
  LineReader reader(in, source);
  reader.next();
  auto header = split(reader.line(), '\t');
  if (header[0] != "candidates") reader.fail("expected a 'candidates' or 'campaign' header");
  CandidateSet out;
  out.campaign = reader.campaign(header, schema);
  while (reader.next()) out.users.push_back(reader.user(split(reader.line(), '\t'), schema));
  return out;
}

FeatureSchema find_schema(const std::filesystem::path& dir) {
  for (const auto& candidate : {dir / "schema.txt", dir.parent_path() / "schema.txt"}) {
    if (std::filesystem::is_regular_file(candidate)) return FeatureSchema::read_file(candidate.string());
  }
  throw SchemaError("no schema.txt in '" + dir.string() + "' or its parent");
}

std::vector<std::uint64_t> sample_negatives(std::span<const std::uint64_t> pool,
                                            std::span<const std::uint64_t> seeds, std::size_t ratio, Rng& rng) {
  if (pool.size() < seeds.size()) {
    throw ConfigError("sample_negatives: pool (" + std::to_string(pool.size()) + ") smaller than seed set (" +
                      std::to_string(seeds.size()) + ")");
  }
  const std::unordered_set<std::uint64_t> seed_set(seeds.begin(), seeds.end());
  std::vector<std::uint64_t> remainder;
  remainder.reserve(pool.size());
  for (auto id : pool) {
    if (!seed_set.contains(id)) remainder.push_back(id);
  }
  const std::size_t count = std::min(ratio * seeds.size(), remainder.size());
  for (std::size_t i = 0; i < count; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, remainder.size() - 1);
    std::swap(remainder[i], remainder[pick(rng)]);
  }
  remainder.resize(count);
  return remainder;
}

}  // namespace metaheac
