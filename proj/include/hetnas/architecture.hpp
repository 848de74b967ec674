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

#ifndef HETNAS_ARCHITECTURE_HPP_
#define HETNAS_ARCHITECTURE_HPP_

#include <cstddef>
#include <string>
#include <vector>

#include "hetnas/attention.hpp"

namespace hetnas {

struct HeadGroup {
  AttentionKind kind = AttentionKind::kDense;
  std::size_t heads = 1;

  friend bool operator==(const HeadGroup&, const HeadGroup&) = default;
};

using LayerSpec = std::vector<HeadGroup>;

// Per-layer attention mix: the output of a search and the input to model
// derivation.
//
// Text form (YAML):
//
//   format: hetnas-architecture
//   version: 1
//   layers:
//     - - {kind: Performer, heads: 4}
//       - {kind: Reformer, heads: 4}
//     - - {kind: Sparse, heads: 8}
struct ArchitectureSpec {
  std::vector<LayerSpec> layers;

  static ArchitectureSpec homogeneous(AttentionKind kind, std::size_t heads, std::size_t num_layers = 1);

  // Same-kind entries of a layer merged into one group, groups ordered by
  // kind. Layer order is kept.
  ArchitectureSpec canonical() const;
  bool is_canonical() const;
  std::size_t total_heads(std::size_t layer) const;

  // "Bigbird x2 Linear x2 Performer x2 Reformer x2", layers joined by " -> ".
  std::string describe() const;

  std::string to_yaml() const;
  static ArchitectureSpec from_yaml(const std::string& text);
  void save(const std::string& path) const;
  static ArchitectureSpec load(const std::string& path);

  friend bool operator==(const ArchitectureSpec&, const ArchitectureSpec&) = default;
};

}  // namespace hetnas

#endif  // HETNAS_ARCHITECTURE_HPP_
