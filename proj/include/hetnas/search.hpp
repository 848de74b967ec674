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

// Architecture search over attention mechanisms.
//
// A block's score is the validation accuracy lost when it is masked out of
// its layer: s_i = a_base - a_i. Higher is better.
//
//   select_homogeneous      one H-head block per kind, train, score, take the best
//   prune_search            H single-head blocks per kind, then repeatedly drop
//                           the lowest-scoring block and fine-tune until H remain
//   oneshot_top4            top-k kinds of one scoring pass, heads split evenly
//   layerwise_prune_search  per-layer pruning of H-head blocks over L layers,
//                           trained with block sampling

#ifndef HETNAS_SEARCH_HPP_
#define HETNAS_SEARCH_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hetnas/architecture.hpp"
#include "hetnas/model.hpp"
#include "hetnas/tasks.hpp"
#include "hetnas/train.hpp"

namespace hetnas {

struct ScoreEntry {
  std::size_t layer = 0;
  std::size_t block = 0;
  AttentionKind kind = AttentionKind::kDense;
  double score = 0.0;

  friend bool operator==(const ScoreEntry&, const ScoreEntry&) = default;
};

struct ScoreTable {
  double a_base = 0.0;
  std::vector<ScoreEntry> entries;

  // Highest score; ties go to the earlier entry.
  const ScoreEntry& best() const;
  // Lowest score; ties go to the larger block index, then the larger kind name.
  const ScoreEntry& worst() const;

  // CSV with header "layer,block,kind,score,a_base". Numbers are written
  // with round-trip precision.
  std::string to_csv(bool header = true) const;
  // Accepts any finite scores, so published tables (in percentage points)
  // can be replayed.
  static ScoreTable from_csv(const std::string& text);
  static ScoreTable load_csv(const std::string& path);

  friend bool operator==(const ScoreTable&, const ScoreTable&) = default;
};

struct SearchConfig {
  std::size_t heads = 4;  // H, heads per layer of the result
  std::int64_t pretrain_steps = 2000;
  std::int64_t finetune_steps = 200;
  std::size_t oneshot_k = 4;
  std::size_t sample_size = 0;  // block sampling; 0 disables
  std::size_t layers = 1;       // layer-wise search depth
  double low_confidence_threshold = 0.02;
  std::uint64_t seed = 0;
  TrainOptions train;
  // Blocks of these kinds start with a zero output projection and never
  // train (planted-block constructions).
  std::vector<AttentionKind> zeroed_kinds;

  void validate() const;
};

// Data and model shape a search runs on.
struct SearchTask {
  std::span<const Example> train;
  std::span<const Example> val;
  ModelConfig model;
};

// Observes search progress: a scoring pass and, for pruning, what was removed.
struct SearchEvent {
  std::string kind;  // "pretrain", "score", "prune", "finetune"
  std::size_t step = 0;
  std::size_t layer = 0;
  std::optional<ScoreEntry> removed;
  const ScoreTable* scores = nullptr;
  double loss = 0.0;
  std::int64_t train_steps = 0;
};
using SearchObserver = std::function<void(const SearchEvent&)>;

struct SearchResult {
  ArchitectureSpec spec;
  std::vector<ScoreTable> passes;  // every scoring pass, in order
  std::vector<ScoreEntry> removals;
  std::optional<AttentionKind> selected;  // homogeneous search only
  bool low_confidence = false;
};

// Scores every active block of `layer`. The supernetwork's weights and
// active set are unchanged on return.
ScoreTable score_blocks(Model<float>& supernet, std::size_t layer, std::span<const Example> val);

// Argmax-score kind of a table.
AttentionKind select_from_scores(const ScoreTable& table);

// Single-layer supernetwork with `groups` blocks in order; zeroed kinds applied.
Model<float> build_supernet(const ArchitectureSpec& blocks, const ModelConfig& cfg,
                            const SearchConfig& search);

SearchResult select_homogeneous(std::span<const AttentionKind> candidates, const SearchTask& task,
                                const SearchConfig& cfg, const SearchObserver& observer = {});

SearchResult prune_search(std::span<const AttentionKind> candidates, const SearchTask& task,
                          const SearchConfig& cfg, const SearchObserver& observer = {});

// Top `k` kinds by score (best score per kind; ties to the smaller name),
// with `heads` split evenly and the remainder given to earlier ranks.
ArchitectureSpec oneshot_top4(const ScoreTable& scores, std::size_t heads, std::size_t k = 4);

SearchResult layerwise_prune_search(std::span<const AttentionKind> candidates,
                                    const SearchTask& task, const SearchConfig& cfg,
                                    const SearchObserver& observer = {});

}  // namespace hetnas

#endif  // HETNAS_SEARCH_HPP_
