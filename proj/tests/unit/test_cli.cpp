// Copyright 2026 The metaheac Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <fstream>
#include <sstream>

#include "metaheac/cli.hpp"
#include "metaheac/error.hpp"
#include "metaheac/run_config.hpp"
#include "support/fixtures.hpp"

using namespace metaheac;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "metaheac");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = dispatch(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string read_all(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_config(const std::filesystem::path& p) {
  std::ofstream f(p);
  f << "# desk-scale smoke configuration\n"
       "n_tasks = 8\ntest_tasks = 3\nusers = 300\nseeds_min = 5\nseeds_max = 15\n"
       "n_experts = 3\nm_critics = 2\nexpert_hidden = 8,8\ngate_hidden = 8\nembedding_dim = 4\n"
       "batch_size = 32\nepochs = 2\nbeta = 0.01\nfinetune_max_epochs = 3\n";
}

}  // namespace

TEST_CASE("usage errors") {
  auto none = run({});
  CHECK(none.code != 0);
  CHECK(none.err.find("Usage") != std::string::npos);
  CHECK(run({"frobnicate"}).code != 0);
  CHECK(run({"train-meta", "--tasks", "x"}).code != 0);
  CHECK(run({"gen-synth", "--out", "x", "--bogus"}).code != 0);
  CHECK(run({"help-me"}).code != 0);
}

TEST_CASE("pipeline is reproducible from the seed and independent of threads") {
  fixtures::TempDir dir("cli");
  const auto d = dir.path();
  write_config(d / "run.cfg");
  const std::string cfg = (d / "run.cfg").string();

  auto pipeline = [&](const std::string& tag, const std::string& threads) {
    const auto data = d / ("data_" + tag);
    REQUIRE(run({"gen-synth", "--config", cfg, "--seed", "7", "--out", data.string()}).code == 0);
    REQUIRE(run({"train-meta", "--config", cfg, "--seed", "7", "--threads", threads, "--tasks", (data / "train").string(),
                 "--out", (d / (tag + ".model")).string(), "--log", (d / (tag + ".log")).string()})
                .code == 0);
    const auto ev = run({"evaluate", "--config", cfg, "--seed", "7", "--threads", threads, "--model",
                         (d / (tag + ".model")).string(), "--tasks", (data / "test").string(), "--out",
                         (d / (tag + ".report")).string()});
    REQUIRE(ev.code == 0);
  };
  pipeline("a", "1");
  pipeline("b", "1");
  pipeline("c", "3");
  CHECK(read_all(d / "a.model") == read_all(d / "b.model"));
  CHECK(read_all(d / "a.report") == read_all(d / "b.report"));
  CHECK(read_all(d / "a.log") == read_all(d / "b.log"));
  CHECK(read_all(d / "a.model") == read_all(d / "c.model"));
  CHECK(read_all(d / "a.report") == read_all(d / "c.report"));
  CHECK(read_all(d / "a.report").find("task\tseeds\tgroup\tauc") != std::string::npos);
  CHECK(read_all(d / "a.log").find("iter\ttask\tloss_a\tloss_b") == 0);

  SUBCASE("finetune and expand") {
    const auto task = d / "data_a" / "test" / "test0000.task";
    const auto before = read_all(d / "a.model");
    REQUIRE(run({"finetune", "--config", cfg, "--model", (d / "a.model").string(), "--task", task.string(), "--out",
                 (d / "custom.model").string(), "--log", (d / "ft.log").string()})
                .code == 0);
    CHECK(read_all(d / "a.model") == before);
    CHECK(read_all(d / "ft.log").find("epoch\tloss\n0\t") == 0);

    REQUIRE(run({"expand", "--model", (d / "custom.model").string(), "--candidates", task.string(), "--k", "10",
                 "--out", (d / "ranked.tsv").string()})
                .code == 0);
    std::istringstream selected(read_all(d / "ranked.tsv.selected"));
    std::string line;
    int lines = 0;
    while (std::getline(selected, line)) ++lines;
    CHECK(lines == 10);

    const auto too_many = run({"expand", "--model", (d / "custom.model").string(), "--candidates", task.string(), "--k",
                               "100000", "--out", (d / "x.tsv").string()});
    CHECK(too_many.code != 0);
    CHECK(too_many.err.find("exceeds the candidate pool") != std::string::npos);
  }
}

TEST_CASE("missing files and unknown keys are reported") {
  const auto missing = run({"evaluate", "--model", "/nonexistent/model", "--tasks", "/nonexistent", "--out", "/tmp/x"});
  CHECK(missing.code != 0);
  CHECK(missing.err.find("error:") == 0);

  fixtures::TempDir dir("cli_keys");
  {
    std::ofstream f(dir.path() / "bad.cfg");
    f << "users = 10\nlearning_rate = 0.1\n";
  }
  const auto bad = run({"gen-synth", "--config", (dir.path() / "bad.cfg").string(), "--out", (dir.path() / "o").string()});
  CHECK(bad.code != 0);
  CHECK(bad.err.find("learning_rate") != std::string::npos);
  CHECK(bad.err.find("bad.cfg:2") != std::string::npos);

  RunConfig rc;
  CHECK_THROWS_AS(rc.apply_override("epochs"), ConfigError);
  rc.apply_override("epochs=3");
  CHECK(rc.train.epochs == 3);
  CHECK(rc.finetune_config().lr == rc.train.beta);
  rc.apply_override("finetune_lr = 0.02");
  CHECK(rc.finetune_config().lr == 0.02);
}
