// Copyright 2026 The metaheac Authors
// SPDX-License-Identifier: Apache-2.0

#include "metaheac/cli.hpp"

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <ostream>

#include "metaheac/data_io.hpp"
#include "metaheac/error.hpp"
#include "metaheac/eval.hpp"
#include "metaheac/key_value.hpp"
#include "metaheac/meta_trainer.hpp"
#include "metaheac/model_io.hpp"
#include "metaheac/online.hpp"
#include "metaheac/parallel.hpp"
#include "metaheac/run_config.hpp"
#include "metaheac/synth.hpp"

namespace metaheac {
namespace {

namespace fs = std::filesystem;

struct Common {
  std::string config;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> threads;

  void attach(CLI::App* app) {
    app->add_option("--config", config, "flat key = value configuration file");
    app->add_option("--set", overrides, "override one setting, key=value (repeatable)");
    app->add_option("--seed", seed, "run seed (overrides the config file)");
    app->add_option("--threads", threads, "worker threads, 0 = all cores");
  }

  RunConfig resolve() const {
    RunConfig rc;
    if (!config.empty()) rc.load_file(config);
    for (const auto& o : overrides) rc.apply_override(o);
    if (seed) rc.seed = *seed;
    if (threads) rc.threads = *threads;
    return rc;
  }
};

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream f(path);
  if (!f) throw Error("cannot write '" + path.string() + "'");
  f.precision(17);
  return f;
}

void write_history_record(std::ostream& out, const HistoryRecord& r) {
  out << r.iter << '\t' << r.task << '\t' << format_double(r.loss_a) << '\t' << format_double(r.loss_b) << '\n';
}

void run_gen_synth(const RunConfig& rc, const fs::path& out_dir, std::ostream& out) {
  const SynthDataset data = generate_synth(rc.synth_config());
  write_synth(out_dir, data);
  const auto train = summarize(data.train);
  const auto test = summarize(data.test);
  out << "wrote " << train.tasks << " train tasks (" << train.seeds << " seeds) and " << test.tasks
      << " test tasks (" << test.seeds << " seeds) to " << out_dir.string() << '\n';
}

void run_train(const RunConfig& rc, const fs::path& tasks_dir, const fs::path& model_out, const std::string& log,
               std::ostream& out, std::ostream& err) {
  const FeatureSchema schema = find_schema(tasks_dir);
  const auto tasks = load_tasks(tasks_dir, schema, rc.effective_threads());
  const auto s = summarize(tasks);
  out << "loaded " << s.tasks << " tasks, " << s.seeds << " seeds, " << s.negatives << " negatives\n";
  std::ofstream log_file;
  if (!log.empty()) log_file = open_out(log);
  std::ostream& log_stream = log.empty() ? err : static_cast<std::ostream&>(log_file);
  log_stream << "iter\ttask\tloss_a\tloss_b\n";
  auto model = MetaHeacModel::create(schema, rc.model, rc.model_seed());
  auto result = train_offline(std::move(model), tasks, rc.train_config(),
                              [&](const HistoryRecord& r) { write_history_record(log_stream, r); });
  save_model(model_out, result.model);
  out << "trained " << result.iterations << " iterations; model written to " << model_out.string() << '\n';
}

void run_finetune(const RunConfig& rc, const fs::path& model_in, const fs::path& task_file, const fs::path& model_out,
                  const std::string& log, std::ostream& out) {
  const MetaHeacModel general = load_model(model_in);
  const CampaignTask task = load_task(task_file, general.schema());
  const auto result = finetune(general, task, rc.finetune_config());
  save_model(model_out, result.model);
  if (!log.empty()) {
    auto f = open_out(log);
    f << "epoch\tloss\n";
    for (std::size_t e = 0; e < result.epoch_losses.size(); ++e) f << e << '\t' << format_double(result.epoch_losses[e]) << '\n';
  }
  out << "fine-tuned '" << task.id() << "' for " << result.epochs << " epochs, loss "
      << format_double(result.epoch_losses.front()) << " -> " << format_double(result.epoch_losses.back()) << '\n';
}

void run_expand(const RunConfig& rc, const fs::path& model_in, const fs::path& candidates_file, std::size_t k,
                const fs::path& out_file, std::ostream& out) {
  const MetaHeacModel model = load_model(model_in);
  const CandidateSet cands = load_candidates(candidates_file, model.schema());
  const auto result = expand(model, cands.campaign, cands.users, k, rc.effective_threads());
  {
    auto f = open_out(out_file);
    for (const auto& s : result.ranking) f << s.id << '\t' << format_double(s.score) << '\n';
  }
  {
    auto f = open_out(fs::path(out_file.string() + ".selected"));
    for (auto id : result.selected) f << id << '\n';
  }
  out << "ranked " << result.ranking.size() << " candidates, selected " << result.selected.size() << '\n';
}

void run_evaluate(const RunConfig& rc, const fs::path& model_in, const fs::path& tasks_dir, double k_percent,
                  bool no_finetune, const fs::path& report_out, std::ostream& out) {
  const MetaHeacModel general = load_model(model_in);
  const auto tasks = load_tasks(tasks_dir, general.schema(), rc.effective_threads());
  std::vector<std::vector<double>> scores(tasks.size());
  const FineTuneConfig ft = rc.finetune_config();
  parallel_for(tasks.size(), rc.effective_threads(), [&](std::size_t i) {
    std::vector<const UserRecord*> users;
    for (const auto& u : tasks[i].eval_pool) users.push_back(&u.user);
    if (no_finetune) {
      scores[i] = score_candidates(general, tasks[i].campaign, users);
    } else {
      scores[i] = score_candidates(finetune(general, tasks[i], ft).model, tasks[i].campaign, users);
    }
  });
  const EvalReport report = make_report(tasks, scores, k_percent, rc.seed, rc.threshold);
  {
    auto f = open_out(report_out);
    write_report(f, report);
  }
  write_report(out, report);
}

}  // namespace

int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"metaheac: meta-learned hybrid experts and critics for audience expansion", "metaheac"};
  app.require_subcommand(1);

  Common common;
  std::string out_path, tasks_dir, model_path, task_file, candidates_file, log_path;
  std::size_t k = 0;
  double k_percent = 0.0;
  bool no_finetune = false;

  auto* gen = app.add_subcommand("gen-synth", "generate a synthetic multi-campaign dataset");
  common.attach(gen);
  gen->add_option("--out", out_path, "output directory")->required();

  auto* train = app.add_subcommand("train-meta", "offline stage: train the general model");
  common.attach(train);
  train->add_option("--tasks", tasks_dir, "directory of *.task files (schema.txt here or in its parent)")->required();
  train->add_option("--out", out_path, "model file to write")->required();
  train->add_option("--log", log_path, "progress log (default: stderr)");

  auto* fine = app.add_subcommand("finetune", "online stage: adapt the general model to one campaign");
  common.attach(fine);
  fine->add_option("--model", model_path, "general model")->required();
  fine->add_option("--task", task_file, "task file of the campaign")->required();
  fine->add_option("--out", out_path, "customized model to write")->required();
  fine->add_option("--log", log_path, "per-epoch loss log");

  auto* exp = app.add_subcommand("expand", "score candidates and select the top K");
  common.attach(exp);
  exp->add_option("--model", model_path, "customized model")->required();
  exp->add_option("--candidates", candidates_file, "candidate file, or a task file with an evaluation pool")
      ->required();
  exp->add_option("--k", k, "audience size")->required();
  exp->add_option("--out", out_path, "ranking file; selected ids go to <out>.selected")->required();

  auto* ev = app.add_subcommand("evaluate", "fine-tune per test task and report AUC, P@K%, R@K%");
  common.attach(ev);
  ev->add_option("--model", model_path, "general model")->required();
  ev->add_option("--tasks", tasks_dir, "directory of test *.task files with evaluation pools")->required();
  ev->add_option("--k", k_percent, "K percent (default: k_percent setting)");
  ev->add_option("--out", out_path, "report file")->required();
  ev->add_flag("--no-finetune", no_finetune, "score with the general model directly");

  if (argc <= 1) {
    err << app.help();
    return 2;
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    const RunConfig rc = common.resolve();
    if (*gen) {
      run_gen_synth(rc, out_path, out);
    } else if (*train) {
      run_train(rc, tasks_dir, out_path, log_path, out, err);
    } else if (*fine) {
      run_finetune(rc, model_path, task_file, out_path, log_path, out);
    } else if (*exp) {
      run_expand(rc, model_path, candidates_file, k, out_path, out);
    } else if (*ev) {
      run_evaluate(rc, model_path, tasks_dir, ev->count("--k") ? k_percent : rc.k_percent, no_finetune, out_path, out);
    }
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace metaheac
