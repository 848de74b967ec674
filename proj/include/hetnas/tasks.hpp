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

// Seeded synthetic sequence-classification tasks.
//
// listops  nested prefix expressions over MAX/MIN/MED/SM and digits; 10 classes
// bytecls  binary motif detection in byte-like noise (local or split motif)
// match    binary "is B a noisy copy of A" over a concatenated pair
//
// Splits are drawn from disjoint child streams of the task seed; every split
// is label-balanced by construction. Generation uses only integer draws, so
// datasets are byte-identical across platforms.

#ifndef HETNAS_TASKS_HPP_
#define HETNAS_TASKS_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hetnas/batch.hpp"
#include "hetnas/rng.hpp"

namespace hetnas {

enum class TaskName : std::uint8_t { kListops, kBytecls, kMatch };

std::string_view task_name(TaskName name);
TaskName parse_task_name(std::string_view name);

enum class MotifLayout : std::uint8_t {
  kLocal,  // contiguous motif at a random position
  kSplit,  // two halves in the first and last quarter of the sequence
};

struct TaskSpec {
  TaskName name = TaskName::kBytecls;
  std::size_t max_seq_len = 128;
  std::size_t train_size = 2000;
  std::size_t val_size = 500;
  std::size_t test_size = 500;
  std::uint64_t seed = 0;

  // listops
  std::size_t max_depth = 2;
  std::size_t max_args = 4;

  // bytecls and match
  std::size_t alphabet = 32;  // byte-like symbols after the reserved ids

  // bytecls
  std::size_t motif_len = 4;
  MotifLayout layout = MotifLayout::kLocal;
  bool motif_at_start = false;
  // Local layout only. When > 0 the labelled motif lies within the first
  // `motif_region` positions and a decoy (intact or corrupted with equal
  // probability, independent of the label) is placed after the region.
  std::size_t motif_region = 0;
  // Probability that a background position holds a random symbol instead of
  // the filler symbol.
  double noise = 1.0;

  // match: per-token drop probability when B is derived from A.
  double corruption = 0.1;
  // Positives use the lower half of the alphabet, negatives' B the upper half.
  bool disjoint_negatives = false;

  void validate() const;
  std::size_t vocab_size() const;
  std::size_t num_classes() const;
};

struct Example {
  std::vector<std::int32_t> tokens;
  std::int32_t label = 0;
  std::int32_t segment = -1;  // index of the separator (match task)

  friend bool operator==(const Example&, const Example&) = default;
};

struct Dataset {
  TaskSpec spec;
  std::vector<Example> train;
  std::vector<Example> val;
  std::vector<Example> test;
};

// Listops token ids.
namespace listops {
inline constexpr std::int32_t kDigit0 = kFirstTaskToken;  // digits 0..9
inline constexpr std::int32_t kMax = kDigit0 + 10;
inline constexpr std::int32_t kMin = kMax + 1;
inline constexpr std::int32_t kMed = kMax + 2;
inline constexpr std::int32_t kSumMod = kMax + 3;
inline constexpr std::int32_t kClose = kMax + 4;
inline constexpr std::size_t kVocab = static_cast<std::size_t>(kClose) + 1;

// "[MAX 2 9 0]" style text to tokens and back.
std::vector<std::int32_t> tokenize(std::string_view text);
std::string detokenize(std::span<const std::int32_t> tokens);
// Value of a token expression (MED is the truncated median).
std::int32_t evaluate(std::span<const std::int32_t> tokens);
}  // namespace listops

Dataset gen_listops(const TaskSpec& spec);
Dataset gen_bytecls(const TaskSpec& spec);
Dataset gen_match(const TaskSpec& spec);
Dataset generate(const TaskSpec& spec);

// The class-1 motif of a bytecls task.
std::vector<std::int32_t> bytecls_motif(const TaskSpec& spec);

// Right-pads consecutive examples into batches of `batch_size` (the last may
// be smaller). With `shuffle`, the example order is permuted first.
std::vector<TokenBatch> make_batches(std::span<const Example> examples, std::size_t batch_size,
                                     std::int32_t pad_id = kPadId, Rng* shuffle = nullptr);
TokenBatch make_batch(std::span<const Example* const> examples, std::int32_t pad_id = kPadId);

// Line-delimited text: "split<TAB>label<TAB>segment<TAB>space-separated ids".
void export_dataset(const Dataset& data, const std::string& path);
Dataset import_dataset(const std::string& path, const TaskSpec& spec);

}  // namespace hetnas

#endif  // HETNAS_TASKS_HPP_
