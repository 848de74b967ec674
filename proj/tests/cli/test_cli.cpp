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

// Exercises the shared library through its C interface and the hetnas
// executable as a subprocess. Nothing here links the C++ core.

#include <gtest/gtest.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "hetnas/hetnas.h"

#if !defined(HETNAS_CLI_PATH) || !defined(HETNAS_TEST_DATA)
#error "HETNAS_CLI_PATH and HETNAS_TEST_DATA must be defined"
#endif

namespace {

namespace fs = std::filesystem;

class Scratch {
 public:
  explicit Scratch(const std::string& name)
      : path_(fs::temp_directory_path() / ("hetnas_cli_" + name + "_" + std::to_string(::getpid()))) {
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~Scratch() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  fs::path operator/(const std::string& s) const { return path_ / s; }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

struct Outcome {
  int code = -1;
  std::string output;  // stdout and stderr
};

Outcome run_cli(const std::string& args) {
  const std::string cmd = std::string("'") + HETNAS_CLI_PATH + "' " + args + " 2>&1";
  Outcome o;
  FILE* p = ::popen(cmd.c_str(), "r");
  if (!p) return o;
  char buf[4096];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, p)) > 0) o.output.append(buf, n);
  const int status = ::pclose(p);
  o.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return o;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

const char* kTiny = R"(seed: 5
task: {name: bytecls, max_seq_len: 16, train_size: 256, val_size: 64, test_size: 64, alphabet: 12, motif_len: 3}
model: {embed_dim: 16, head_dim: 8, ffn_hidden: 32, attention: {window: 4, proj_rank: 4, num_features: 16, bucket_size: 4}}
search: {candidates: [Local, Sparse, Bigbird], heads: 2, pretrain_steps: 30, finetune_steps: 5}
train: {steps: 30, repeats: 1, warmup: 10, eval_every: 10}
)";

std::string tiny_config(const Scratch& s) {
  const auto path = (s / "tiny.yaml").string();
  std::ofstream(path) << kTiny;
  return path;
}

std::string describe(const hetnas_spec* spec) {
  std::size_t needed = 0;
  EXPECT_EQ(hetnas_spec_describe(spec, nullptr, 0, &needed), HETNAS_OK);  // size query
  std::string out(needed, '\0');
  if (needed > 1) {
    EXPECT_EQ(hetnas_spec_describe(spec, out.data(), needed - 1, nullptr), HETNAS_ERR_USAGE);
  }
  EXPECT_EQ(hetnas_spec_describe(spec, out.data(), out.size(), &needed), HETNAS_OK);
  out.resize(needed - 1);
  return out;
}

std::string reference(const char* name) { return std::string(HETNAS_TEST_DATA) + "/reference_scores_" + name + ".csv"; }

// ---- C API -------------------------------------------------------------------

TEST(CApi, VersionIsSet) {
  ASSERT_NE(hetnas_version(), nullptr);
  EXPECT_GT(std::string(hetnas_version()).size(), 0u);
}

TEST(CApi, SpecParseDescribeAndYaml) {
  hetnas_spec* spec = nullptr;
  ASSERT_EQ(hetnas_spec_parse("layers:\n  - [{kind: Sparse, heads: 2}, {kind: Local, heads: 1}]\n  - [{kind: Performer, heads: 3}]\n",
                              &spec),
            HETNAS_OK);
  EXPECT_EQ(hetnas_spec_num_layers(spec), 2u);
  EXPECT_EQ(describe(spec), "Sparse x2 Local -> Performer x3");
  std::size_t needed = 0;
  hetnas_spec_to_yaml(spec, nullptr, 0, &needed);
  std::string yaml(needed, '\0');
  ASSERT_EQ(hetnas_spec_to_yaml(spec, yaml.data(), yaml.size(), nullptr), HETNAS_OK);
  hetnas_spec* back = nullptr;
  ASSERT_EQ(hetnas_spec_parse(yaml.c_str(), &back), HETNAS_OK);
  EXPECT_EQ(describe(back), describe(spec));
  hetnas_spec_free(back);
  hetnas_spec_free(spec);
}

TEST(CApi, BadInputSetsLastError) {
  hetnas_spec* spec = nullptr;
  EXPECT_EQ(hetnas_spec_parse("layers: [[{kind: Nope, heads: 1}]]", &spec), HETNAS_ERR_USAGE);
  EXPECT_EQ(spec, nullptr);
  EXPECT_NE(std::string(hetnas_last_error()).find("Nope"), std::string::npos);
  EXPECT_EQ(hetnas_spec_parse(nullptr, &spec), HETNAS_ERR_USAGE);
  EXPECT_EQ(hetnas_spec_load("/nonexistent/spec.yaml", &spec), HETNAS_ERR_USAGE);
  hetnas_model* model = nullptr;
  EXPECT_NE(hetnas_model_load("/nonexistent.ckpt", &model), HETNAS_OK);
  EXPECT_EQ(model, nullptr);
  hetnas_spec_free(nullptr);
  hetnas_model_free(nullptr);
}

TEST(CApi, OneshotFromScoreFiles) {
  hetnas_spec* spec = nullptr;
  ASSERT_EQ(hetnas_spec_oneshot(reference("text").c_str(), 8, 4, &spec), HETNAS_OK);
  EXPECT_EQ(describe(spec), "Bigbird x2 Linear x2 Performer x2 Reformer x2");
  hetnas_spec_free(spec);
  ASSERT_EQ(hetnas_spec_oneshot(reference("listops").c_str(), 8, 4, &spec), HETNAS_OK);
  EXPECT_EQ(describe(spec), "Local x2 Longformer x2 Reformer x2 Sparse x2");
  hetnas_spec_free(spec);
  EXPECT_EQ(hetnas_spec_oneshot(reference("text").c_str(), 8, 12, &spec), HETNAS_ERR_USAGE);
}

TEST(CApi, TrainedModelPredicts) {
  Scratch s("capi_model");
  const auto cfg = tiny_config(s);
  hetnas_spec* spec = nullptr;
  ASSERT_EQ(hetnas_spec_parse("layers: [[{kind: Bigbird, heads: 2}]]", &spec), HETNAS_OK);
  ASSERT_EQ(hetnas_spec_save(spec, (s / "spec.yaml").c_str()), HETNAS_OK);
  hetnas_spec_free(spec);
  ASSERT_EQ(hetnas_cmd_train((s / "spec.yaml").c_str(), cfg.c_str(), (s / "run").c_str(), nullptr, 0, 0), HETNAS_OK)
      << hetnas_last_error();

  hetnas_model* model = nullptr;
  ASSERT_EQ(hetnas_model_load((s / "run" / "checkpoints" / "seed_5.ckpt").c_str(), &model), HETNAS_OK);
  EXPECT_EQ(hetnas_model_num_classes(model), 2u);
  EXPECT_EQ(hetnas_model_max_seq_len(model), 16u);
  const std::vector<int32_t> tokens = {3, 4, 5, 6, 7, 8};
  float a[2], b[2];
  ASSERT_EQ(hetnas_model_predict(model, tokens.data(), tokens.size(), a, 2), HETNAS_OK);
  ASSERT_EQ(hetnas_model_predict(model, tokens.data(), tokens.size(), b, 2), HETNAS_OK);
  EXPECT_TRUE(std::isfinite(a[0]) && std::isfinite(a[1]));
  EXPECT_EQ(a[0], b[0]);
  EXPECT_EQ(hetnas_model_predict(model, tokens.data(), tokens.size(), a, 1), HETNAS_ERR_USAGE);
  const std::vector<int32_t> bad = {3, 999};
  EXPECT_EQ(hetnas_model_predict(model, bad.data(), bad.size(), a, 2), HETNAS_ERR_USAGE);
  const std::vector<int32_t> too_long(17, 3);
  EXPECT_EQ(hetnas_model_predict(model, too_long.data(), too_long.size(), a, 2), HETNAS_ERR_USAGE);
  hetnas_model_free(model);
}

TEST(CApi, CommandStatusCodes) {
  Scratch s("capi_cmd");
  EXPECT_EQ(hetnas_cmd_search("nope", nullptr, (s / "x").c_str(), nullptr, nullptr, 0, 0), HETNAS_ERR_USAGE);
  EXPECT_EQ(hetnas_cmd_report(s.path().c_str(), 0), HETNAS_ERR_USAGE);
  EXPECT_NE(std::string(hetnas_last_error()).find("no runs found"), std::string::npos);
  std::ofstream((s / "file").string()) << "x";
  const char* sets[] = {"search.heads=1"};
  EXPECT_EQ(hetnas_cmd_search("oneshot", nullptr, (s / "file" / "out").c_str(), reference("text").c_str(), sets, 1, 0),
            HETNAS_ERR_RUNTIME);
}

// ---- executable -----------------------------------------------------------------

TEST(Cli, UsageErrorsExitOne) {
  EXPECT_EQ(run_cli("").code, 1);
  EXPECT_EQ(run_cli("frobnicate").code, 1);
  EXPECT_EQ(run_cli("search --mode sideways --out /tmp/x").code, 1);
  const auto missing = run_cli("search --mode prune --config /nonexistent.yaml --out /tmp/hetnas_never");
  EXPECT_EQ(missing.code, 1);
  EXPECT_NE(missing.output.find("/nonexistent.yaml"), std::string::npos);
  EXPECT_EQ(run_cli("search --mode prune --set nonsense --out /tmp/hetnas_never").code, 1);
}

TEST(Cli, HelpAndVersionSucceed) {
  EXPECT_EQ(run_cli("--help").code, 0);
  const auto v = run_cli("--version");
  EXPECT_EQ(v.code, 0);
  EXPECT_NE(v.output.find(hetnas_version()), std::string::npos);
}

TEST(Cli, EmptyReportDirectoryFails) {
  Scratch s("cli_empty");
  const auto o = run_cli("report '" + s.path().string() + "'");
  EXPECT_NE(o.code, 0);
  EXPECT_NE(o.output.find("no runs found"), std::string::npos);
}

TEST(Cli, RuntimeFailuresExitTwo) {
  Scratch s("cli_runtime");
  std::ofstream((s / "file").string()) << "x";
  const auto o = run_cli("search --mode oneshot --scores '" + reference("text") + "' --out '" +
                         (s / "file" / "out").string() + "'");
  EXPECT_EQ(o.code, 2) << o.output;
}

TEST(Cli, SearchTrainReportPipeline) {
  Scratch s("cli_pipeline");
  const auto cfg = tiny_config(s);
  const auto runs = s / "runs";
  auto o = run_cli("-v search --mode prune --config '" + cfg + "' --out '" + (runs / "prune").string() + "'");
  ASSERT_EQ(o.code, 0) << o.output;
  EXPECT_TRUE(fs::exists(runs / "prune" / "spec.yaml"));
  // Same directory again needs --force.
  EXPECT_EQ(run_cli("search --mode prune --config '" + cfg + "' --out '" + (runs / "prune").string() + "'").code, 1);
  o = run_cli("train --spec '" + (runs / "prune" / "spec.yaml").string() + "' --config '" + cfg + "' --out '" +
              (runs / "train").string() + "'");
  ASSERT_EQ(o.code, 0) << o.output;
  EXPECT_TRUE(fs::exists(runs / "train" / "results.csv"));
  o = run_cli("report '" + runs.string() + "' --plots");
  ASSERT_EQ(o.code, 0) << o.output;
  // 3 kinds x 2 heads pruned to 2 heads.
  EXPECT_NE(o.output.find("4 removals"), std::string::npos) << o.output;
  EXPECT_TRUE(fs::exists(runs / "report" / "summary.csv"));
  EXPECT_TRUE(fs::exists(runs / "report" / "train_curves.svg"));
}

TEST(Cli, RerunsAreByteIdentical) {
  Scratch s("cli_rerun");
  const auto cfg = tiny_config(s);
  for (const char* mode : {"homo", "oneshot"}) {
    for (const char* out : {"a", "b"}) {
      ASSERT_EQ(run_cli(std::string("search --force --mode ") + mode + " --config '" + cfg + "' --out '" +
                        (s / out).string() + "' --set search.heads=4 --set 'search.candidates=[Local, Sparse, Bigbird, Linear]'")
                    .code,
                0);
    }
    EXPECT_EQ(slurp(s / "a" / "spec.yaml"), slurp(s / "b" / "spec.yaml"));
    EXPECT_EQ(slurp(s / "a" / "scores_000.csv"), slurp(s / "b" / "scores_000.csv"));
    EXPECT_FALSE(slurp(s / "a" / "scores_000.csv").empty());
  }
}

}  // namespace
