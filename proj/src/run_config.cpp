// Copyright 2026 The metaheac Authors
// SPDX-License-Identifier: Apache-2.0

#include "metaheac/run_config.hpp"

#include <ostream>

#include "metaheac/error.hpp"
#include "metaheac/key_value.hpp"
#include "metaheac/model_io.hpp"
#include "metaheac/parallel.hpp"

namespace metaheac {
namespace {

enum Stream : std::uint64_t { kModelInit = 0, kTraining = 1, kFineTune = 2, kSynth = 3 };

Reduction parse_reduction(std::string_view v) {
  if (v == "mean") return Reduction::kMean;
  if (v == "sum") return Reduction::kSum;
  throw ConfigError("reduction must be mean or sum, got '" + std::string(v) + "'");
}

const char* to_string(Reduction r) { return r == Reduction::kMean ? "mean" : "sum"; }

bool apply_global(RunConfig& c, std::string_view key, std::string_view v) {
  TrainConfig& t = c.train;
  FineTuneConfig& f = c.finetune;
  if (key == "seed") c.seed = parse_uint(v, key);
  else if (key == "threads") c.threads = parse_uint(v, key);
  else if (key == "k_percent") c.k_percent = parse_double(v, key);
  else if (key == "threshold") c.threshold = parse_uint(v, key);
  else if (key == "alpha") t.alpha = parse_double(v, key);
  else if (key == "beta") t.beta = parse_double(v, key);
  else if (key == "batch_size") t.batch_size = parse_uint(v, key);
  else if (key == "tasks_per_iter") t.tasks_per_iter = parse_uint(v, key);
  else if (key == "epochs") t.epochs = parse_uint(v, key);
  else if (key == "adam_beta1") t.adam_beta1 = parse_double(v, key);
  else if (key == "adam_beta2") t.adam_beta2 = parse_double(v, key);
  else if (key == "adam_epsilon") t.adam_epsilon = parse_double(v, key);
  else if (key == "second_order") t.second_order = parse_bool(v, key);
  else if (key == "reduction") t.reduction = parse_reduction(v);
  else if (key == "mode") t.mode = parse_train_mode(v);
  else if (key == "finetune_lr") c.finetune_lr = parse_double(v, key);
  else if (key == "finetune_max_epochs") f.max_epochs = parse_uint(v, key);
  else if (key == "finetune_rel_tol") f.rel_tol = parse_double(v, key);
  else if (key == "finetune_patience") f.patience = parse_uint(v, key);
  else if (key == "finetune_batch_size") f.batch_size = parse_uint(v, key);
  else if (key == "synth_seed") c.synth_seed = parse_uint(v, key);
  else return false;
  return true;
}

}  // namespace

void RunConfig::apply(std::string_view key, std::string_view value, std::string_view source) {
  try {
    if (apply_global(*this, key, value)) return;
    if (apply_model_setting(model, key, value)) return;
    if (apply_synth_setting(synth, key, value)) return;
  } catch (const ConfigError& e) {
    throw ConfigError(std::string(source) + ": " + e.what());
  }
  throw ConfigError(std::string(source) + ": unknown configuration key '" + std::string(key) + "'");
}

void RunConfig::load_file(const std::filesystem::path& path) {
  for (const auto& kv : read_key_value_file(path)) {
    apply(kv.key, kv.value, path.string() + ":" + std::to_string(kv.line));
  }
}

void RunConfig::apply_override(std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos) throw ConfigError("override '" + std::string(assignment) + "' is not key=value");
  apply(trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)), "--set " + std::string(assignment));
}

std::size_t RunConfig::effective_threads() const { return threads == 0 ? default_threads() : threads; }

std::uint64_t RunConfig::model_seed() const { return derive_seed(seed, kModelInit); }

TrainConfig RunConfig::train_config() const {
  TrainConfig t = train;
  t.seed = derive_seed(seed, kTraining);
  t.threads = effective_threads();
  return t;
}

FineTuneConfig RunConfig::finetune_config() const {
  FineTuneConfig f = finetune;
  f.lr = finetune_lr.value_or(train.beta);
  f.adam_beta1 = train.adam_beta1;
  f.adam_beta2 = train.adam_beta2;
  f.adam_epsilon = train.adam_epsilon;
  f.reduction = train.reduction;
  f.seed = derive_seed(seed, kFineTune);
  return f;
}

SynthConfig RunConfig::synth_config() const {
  SynthConfig s = synth;
  s.seed = synth_seed.value_or(derive_seed(seed, kSynth));
  return s;
}

void RunConfig::write(std::ostream& out) const {
  const TrainConfig& t = train;
  const FineTuneConfig f = finetune_config();
  out << "seed = " << seed << "\nthreads = " << threads << "\nk_percent = " << format_double(k_percent) << '\n';
  if (threshold) out << "threshold = " << *threshold << '\n';
  write_model_config(out, model);
  out << "alpha = " << format_double(t.alpha) << "\nbeta = " << format_double(t.beta)
      << "\nbatch_size = " << t.batch_size << "\ntasks_per_iter = " << t.tasks_per_iter << "\nepochs = " << t.epochs
      << "\nadam_beta1 = " << format_double(t.adam_beta1) << "\nadam_beta2 = " << format_double(t.adam_beta2)
      << "\nadam_epsilon = " << format_double(t.adam_epsilon) << "\nsecond_order = " << (t.second_order ? "true" : "false")
      << "\nreduction = " << to_string(t.reduction) << "\nmode = " << to_string(t.mode)
      << "\nfinetune_lr = " << format_double(f.lr) << "\nfinetune_max_epochs = " << f.max_epochs
      << "\nfinetune_rel_tol = " << format_double(f.rel_tol) << "\nfinetune_patience = " << f.patience
      << "\nfinetune_batch_size = " << f.batch_size << '\n';
  SynthConfig s = synth;
  s.seed = synth_config().seed;
  write_synth_config(out, s);
}

}  // namespace metaheac
