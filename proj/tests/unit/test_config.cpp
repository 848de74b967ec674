// Copyright 2026 The HetNAS Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>
#include <json.hpp>

#include <fstream>
#include <sstream>

#include "hetnas/config.hpp"
#include "hetnas/error.hpp"
#include "hetnas/runner.hpp"
#include "test_util.hpp"

namespace hetnas {
namespace {

namespace fs = std::filesystem;

const char* kTinyConfig = R"(seed: 3
task:
  name: bytecls
  max_seq_len: 16
  train_size: 256
  val_size: 64
  test_size: 64
  alphabet: 12
  motif_len: 3
model:
  embed_dim: 16
  head_dim: 8
  ffn_hidden: 32
  attention:
    window: 4
    proj_rank: 4
    num_features: 16
    bucket_size: 4
search:
  candidates: [Local, Bigbird]
  heads: 2
  pretrain_steps: 30
  finetune_steps: 5
train:
  steps: 30
  repeats: 2
  warmup: 10
  eval_every: 10
)";

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::vector<std::string>> csv_rows(const fs::path& p) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(slurp(p));
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string c; std::getline(ss, c, ',');) cells.push_back(c);
    rows.push_back(cells);
  }
  return rows;
}

std::string write_config(const testing::TempDir& dir) {
  const auto path = (dir.path() / "tiny.yaml").string();
  std::ofstream(path) << kTinyConfig;
  return path;
}

// ---- config ------------------------------------------------------------------

TEST(Config, DefaultsAreValid) {
  const auto c = RunConfig::parse("");
  EXPECT_EQ(c.task.max_seq_len, 128u);
  EXPECT_EQ(c.search.heads, 4u);
  EXPECT_EQ(c.search.pretrain_steps, 2000);
  EXPECT_EQ(c.search.finetune_steps, 200);
  EXPECT_EQ(c.model.vocab_size, c.task.vocab_size());
  EXPECT_EQ(c.candidates.size(), 9u);
}

TEST(Config, SeedPropagatesUnlessOverridden) {
  auto c = RunConfig::parse(kTinyConfig);
  EXPECT_EQ(c.task.seed, 3u);
  EXPECT_EQ(c.search.seed, 3u);
  c = RunConfig::parse(kTinyConfig, {"task.seed=9"});
  EXPECT_EQ(c.task.seed, 9u);
  EXPECT_EQ(c.search.seed, 3u);
}

TEST(Config, OverridesApplyAndCreateSections) {
  const auto c = RunConfig::parse(kTinyConfig, {"search.heads=3", "model.attention.window=6",
                                               "search.candidates=[Performer, Sparse]"});
  EXPECT_EQ(c.search.heads, 3u);
  EXPECT_EQ(c.model.attention.window, 6u);
  EXPECT_EQ(c.candidates, (std::vector<AttentionKind>{AttentionKind::kPerformer, AttentionKind::kSparse}));
  EXPECT_EQ(RunConfig::parse("", {"train.steps=7"}).train_steps, 7);
}

TEST(Config, RejectsBadInput) {
  EXPECT_THROW(RunConfig::parse("task: {nmae: bytecls}"), UsageError);
  EXPECT_THROW(RunConfig::parse("bogus: 1"), UsageError);
  EXPECT_THROW(RunConfig::parse("[1, 2]"), UsageError);
  EXPECT_THROW(RunConfig::parse("seed: [1"), UsageError);
  EXPECT_THROW(RunConfig::parse("search: {heads: 0}"), UsageError);
  EXPECT_THROW(RunConfig::parse("search: {candidates: [Nope]}"), UsageError);
  EXPECT_THROW(RunConfig::parse("train: {steps: many}"), UsageError);
  EXPECT_THROW(RunConfig::parse("", {"noequals"}), UsageError);
  EXPECT_THROW(RunConfig::load("/nonexistent/config.yaml"), UsageError);
}

TEST(Config, YamlRoundTrip) {
  const auto c = RunConfig::parse(kTinyConfig, {"train.base_lr=0.0123456789"});
  EXPECT_EQ(RunConfig::parse(c.to_yaml()).to_yaml(), c.to_yaml());
  EXPECT_DOUBLE_EQ(RunConfig::parse(c.to_yaml()).train.base_lr, 0.0123456789);
}

// ---- runner ------------------------------------------------------------------

TEST(Runner, CheckpointReproducesRecordedValidationAccuracy) {
  testing::TempDir dir("runner_train");
  const auto cfg_path = write_config(dir);
  const auto spec_path = (dir.path() / "spec.yaml").string();
  ArchitectureSpec::homogeneous(AttentionKind::kBigbird, 2).save(spec_path);
  run_train({spec_path, cfg_path, (dir.path() / "run").string(), {}, false});

  const auto cfg = RunConfig::load(cfg_path);
  const auto data = generate(cfg.task);
  const auto rows = csv_rows(dir.path() / "run" / "results.csv");
  ASSERT_EQ(rows.size(), 2u);
  for (const auto& row : rows) {
    const auto model = load_checkpoint((dir.path() / "run" / "checkpoints" / ("seed_" + row[1] + ".ckpt")).string());
    EXPECT_EQ(validation_accuracy(model, std::span<const Example>(data.val)), std::stod(row[2]));
    EXPECT_EQ(validation_accuracy(model, std::span<const Example>(data.test)), std::stod(row[3]));
  }
  // Existing output is protected unless forced.
  EXPECT_THROW(run_train({spec_path, cfg_path, (dir.path() / "run").string(), {}, false}), UsageError);
}

TEST(Runner, ReportCountsEveryRemoval) {
  testing::TempDir dir("runner_report");
  const auto cfg_path = write_config(dir);
  run_search({"prune", cfg_path, (dir.path() / "runs" / "prune").string(), "", {}, false});
  run_search({"homo", cfg_path, (dir.path() / "runs" / "homo").string(), "", {}, false});
  run_report({(dir.path() / "runs").string(), true});

  // Initial blocks = 2 kinds x 2 heads, pruned down to 2.
  std::size_t prune_records = 0, score_records = 0;
  std::istringstream log(slurp(dir.path() / "runs" / "prune" / "search_log.jsonl"));
  for (std::string line; std::getline(log, line);) {
    const auto rec = nlohmann::json::parse(line);
    prune_records += rec.at("event") == "prune";
    score_records += rec.at("event") == "score";
  }
  EXPECT_EQ(prune_records, 2u);

  const auto report = dir.path() / "runs" / "report";
  const auto prunes = csv_rows(report / "prunes.csv");
  EXPECT_EQ(prunes.size(), prune_records);
  for (const auto& row : prunes) EXPECT_EQ(row[0], "prune");
  const auto summary = csv_rows(report / "summary.csv");
  ASSERT_EQ(summary.size(), 2u);
  EXPECT_EQ(summary[0][0], "homo");
  EXPECT_EQ(summary[0][4], "0");
  EXPECT_EQ(summary[1][0], "prune");
  EXPECT_EQ(summary[1][3], std::to_string(score_records));
  EXPECT_EQ(summary[1][4], std::to_string(prune_records));
  EXPECT_TRUE(fs::exists(report / "prune_scores.svg"));
  // One score file per pass.
  for (std::size_t p = 0; p < score_records; ++p) {
    char name[32];
    std::snprintf(name, sizeof name, "scores_%03zu.csv", p);
    EXPECT_TRUE(fs::exists(dir.path() / "runs" / "prune" / name)) << name;
  }
}

TEST(Runner, ReportRecountsTrainingResults) {
  testing::TempDir dir("runner_recount");
  const auto cfg_path = write_config(dir);
  const auto spec_path = (dir.path() / "spec.yaml").string();
  ArchitectureSpec::homogeneous(AttentionKind::kLocal, 2).save(spec_path);
  run_train({spec_path, cfg_path, (dir.path() / "runs" / "t").string(), {}, false});
  run_report({(dir.path() / "runs").string(), false});
  double val = 0.0, test = 0.0;
  const auto rows = csv_rows(dir.path() / "runs" / "t" / "results.csv");
  for (const auto& r : rows) {
    val += std::stod(r[2]);
    test += std::stod(r[3]);
  }
  const auto summary = csv_rows(dir.path() / "runs" / "report" / "summary.csv");
  ASSERT_EQ(summary.size(), 1u);
  EXPECT_EQ(summary[0][6], std::to_string(rows.size()));
  EXPECT_DOUBLE_EQ(std::stod(summary[0][7]), val / static_cast<double>(rows.size()));
  EXPECT_DOUBLE_EQ(std::stod(summary[0][8]), test / static_cast<double>(rows.size()));
  EXPECT_EQ(csv_rows(dir.path() / "runs" / "report" / "curves.csv").size(),
            csv_rows(dir.path() / "runs" / "t" / "curve.csv").size());
}

TEST(Runner, EmptyDirectoryHasNoRuns) {
  testing::TempDir dir("runner_empty");
  try {
    run_report({dir.path().string(), false});
    FAIL() << "expected an error";
  } catch (const UsageError& e) {
    EXPECT_NE(std::string(e.what()).find("no runs found"), std::string::npos);
  }
}

TEST(Runner, SearchRerunIsByteIdentical) {
  testing::TempDir dir("runner_rerun");
  const auto cfg_path = write_config(dir);
  for (const char* mode : {"prune", "layerwise"}) {
    const std::vector<std::string> sets = {"search.sample_size=1"};
    run_search({mode, cfg_path, (dir.path() / "a").string(), "", sets, true});
    run_search({mode, cfg_path, (dir.path() / "b").string(), "", sets, true});
    for (const auto& entry : fs::directory_iterator(dir.path() / "a")) {
      const auto name = entry.path().filename().string();
      EXPECT_EQ(slurp(entry.path()), slurp(dir.path() / "b" / name)) << mode << " " << name;
    }
  }
}

TEST(Runner, OneshotReplayNeedsOneshotMode) {
  testing::TempDir dir("runner_replay");
  const auto csv = std::string(HETNAS_TEST_DATA) + "/reference_scores_text.csv";
  run_search({"oneshot", "", (dir.path() / "o").string(), csv, {"search.heads=8"}, false});
  EXPECT_EQ(ArchitectureSpec::load((dir.path() / "o" / "spec.yaml").string()).describe(),
            "Bigbird x2 Linear x2 Performer x2 Reformer x2");
  EXPECT_THROW(run_search({"prune", "", (dir.path() / "p").string(), csv, {}, false}), UsageError);
  EXPECT_THROW(run_search({"sideways", "", (dir.path() / "q").string(), "", {}, false}), UsageError);
}

}  // namespace
}  // namespace hetnas
