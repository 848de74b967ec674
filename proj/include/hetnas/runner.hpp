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

// Persisted runs. Every run directory holds run.yaml (version, command,
// seed), config.yaml (the resolved configuration) and the command's
// artifacts; see docs/formats.md.

#ifndef HETNAS_RUNNER_HPP_
#define HETNAS_RUNNER_HPP_

#include <string>
#include <vector>

namespace hetnas {

struct SearchRequest {
  std::string mode;  // homo, prune, oneshot, layerwise
  std::string config_path;
  std::string out_dir;
  std::string scores_csv;  // oneshot: replay a score table instead of searching
  std::vector<std::string> overrides;
  bool force = false;
};

struct TrainRequest {
  std::string spec_path;
  std::string config_path;
  std::string out_dir;
  std::vector<std::string> overrides;
  bool force = false;
};

struct ReportRequest {
  std::string run_dir;
  bool plots = false;
};

// Each throws UsageError or RuntimeError on failure.
void run_search(const SearchRequest& request);
void run_train(const TrainRequest& request);
void run_report(const ReportRequest& request);

// Progress lines on stderr.
void set_verbose(bool verbose);

const char* version_string();

}  // namespace hetnas

#endif  // HETNAS_RUNNER_HPP_
