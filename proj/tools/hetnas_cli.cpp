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

// hetnas command-line tool. Talks to the library only through hetnas.h.
//
// Exit codes: 0 success, 1 usage or config error, 2 runtime error.

#include <CLI11.hpp>

#include <iostream>
#include <string>
#include <vector>

#include "hetnas/hetnas.h"

namespace {

int finish(hetnas_status status) {
  if (status != HETNAS_OK) std::cerr << "error: " << hetnas_last_error() << "\n";
  return static_cast<int>(status);
}

std::vector<const char*> c_strings(const std::vector<std::string>& v) {
  std::vector<const char*> out;
  out.reserve(v.size());
  for (const auto& s : v) out.push_back(s.c_str());
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Heterogeneous attention search for small Transformers", "hetnas"};
  app.set_version_flag("--version", std::string(hetnas_version()));
  app.require_subcommand(1);
  app.fallthrough();
  bool verbose = false;
  app.add_flag("-v,--verbose", verbose, "progress messages on stderr");

  std::string mode, config, out, scores, spec, dir;
  std::vector<std::string> sets;
  bool force = false, plots = false;

  auto* search = app.add_subcommand("search", "run an architecture search");
  search->add_option("--mode", mode, "search procedure")
      ->required()
      ->check(CLI::IsMember({"homo", "prune", "oneshot", "layerwise"}));
  search->add_option("--config", config, "run config (YAML)")->check(CLI::ExistingFile);
  search->add_option("--out", out, "output run directory")->required();
  search->add_option("--scores", scores, "oneshot: replay a score CSV instead of training")
      ->check(CLI::ExistingFile);
  search->add_option("--set", sets, "override a config value, e.g. --set search.heads=8");
  search->add_flag("--force", force, "overwrite a non-empty run directory");

  auto* train = app.add_subcommand("train", "train a derived architecture");
  train->add_option("--spec", spec, "architecture spec (YAML)")->required()->check(CLI::ExistingFile);
  train->add_option("--config", config, "run config (YAML)")->check(CLI::ExistingFile);
  train->add_option("--out", out, "output run directory")->required();
  train->add_option("--set", sets, "override a config value");
  train->add_flag("--force", force, "overwrite a non-empty run directory");

  auto* report = app.add_subcommand("report", "summarise run directories");
  report->add_option("dir", dir, "a run directory or a directory of runs")->required();
  report->add_flag("--plots", plots, "also render SVG plots");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return HETNAS_ERR_USAGE;
  }

  hetnas_set_verbose(verbose ? 1 : 0);
  const auto overrides = c_strings(sets);
  if (*search) {
    return finish(hetnas_cmd_search(mode.c_str(), config.empty() ? nullptr : config.c_str(), out.c_str(),
                                    scores.empty() ? nullptr : scores.c_str(), overrides.data(),
                                    overrides.size(), force ? 1 : 0));
  }
  if (*train) {
    return finish(hetnas_cmd_train(spec.c_str(), config.empty() ? nullptr : config.c_str(), out.c_str(),
                                   overrides.data(), overrides.size(), force ? 1 : 0));
  }
  return finish(hetnas_cmd_report(dir.c_str(), plots ? 1 : 0));
}
