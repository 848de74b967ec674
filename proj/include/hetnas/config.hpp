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

// Run configuration: a YAML tree with a fixed schema (docs/config.md).
// Unknown keys are errors. `--set a.b=value` overrides are applied to the
// tree before validation.

#ifndef HETNAS_CONFIG_HPP_
#define HETNAS_CONFIG_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "hetnas/attention.hpp"
#include "hetnas/model.hpp"
#include "hetnas/search.hpp"
#include "hetnas/tasks.hpp"

namespace hetnas {

struct RunConfig {
  std::uint64_t seed = 0;
  TaskSpec task;  // task.seed defaults to `seed`
  // vocab_size, max_seq_len and num_classes are taken from the task.
  ModelConfig model;
  SearchConfig search;  // search.seed defaults to `seed`
  std::vector<AttentionKind> candidates{kCandidateKinds.begin(), kCandidateKinds.end()};
  // Training of derived models.
  std::int64_t train_steps = 1000;
  std::size_t repeats = 1;  // seeds seed, seed+1, ...
  TrainOptions train;

  // Complete, normalized YAML; parse(to_yaml()) reproduces the config.
  std::string to_yaml() const;
  static RunConfig parse(const std::string& text, const std::vector<std::string>& overrides = {});
  static RunConfig load(const std::string& path, const std::vector<std::string>& overrides = {});
};

}  // namespace hetnas

#endif  // HETNAS_CONFIG_HPP_
