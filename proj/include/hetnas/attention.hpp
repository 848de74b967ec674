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

// Candidate attention mechanisms.
//
// All functions take queries/keys/values laid out as (groups, seq, head_dim),
// where a group is one (example, head) pair. `lengths`, when non-empty, holds
// the number of valid leading positions of each group; trailing positions are
// padding and are never attended to. A padded query row attends only to
// itself so its (discarded) output stays well defined.
//
// Each mechanism is a simplified, value-checkable version of the published
// design; `dense_attention` is the reference they are tested against.

#ifndef HETNAS_ATTENTION_HPP_
#define HETNAS_ATTENTION_HPP_

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hetnas/tensor.hpp"

namespace hetnas {

enum class AttentionKind : std::uint8_t {
  kBigbird,
  kLinear,  // Linear Transformer
  kLinformer,
  kLocal,
  kLongformer,
  kPerformer,
  kReformer,
  kSparse,  // Sparse Transformer
  kSynthesizer,
  kDense,  // reference oracle; only searched when listed explicitly
};

inline constexpr std::array<AttentionKind, 9> kCandidateKinds = {
    AttentionKind::kBigbird,    AttentionKind::kLinear,    AttentionKind::kLinformer,
    AttentionKind::kLocal,      AttentionKind::kLongformer, AttentionKind::kPerformer,
    AttentionKind::kReformer,   AttentionKind::kSparse,    AttentionKind::kSynthesizer};

// Canonical names: Bigbird Linear Linformer Local Longformer Performer
// Reformer Sparse Synthesizer Dense.
std::string_view kind_name(AttentionKind kind);
// Case-insensitive; also accepts LinearTransformer, SparseTransformer.
AttentionKind parse_kind(std::string_view name);

enum class SynthMode : std::uint8_t { kDense, kRandom };

struct AttentionConfig {
  AttentionKind kind = AttentionKind::kDense;
  std::size_t window = 8;         // Local, Sparse, Longformer, Bigbird
  std::size_t num_global = 1;     // Longformer, Bigbird
  std::size_t num_random = 2;     // Bigbird
  std::size_t proj_rank = 16;     // Linformer
  std::size_t num_features = 64;  // Performer
  std::size_t num_hashes = 2;     // Reformer
  std::size_t bucket_size = 16;   // Reformer
  SynthMode synth_mode = SynthMode::kDense;
  // Longest context the mechanism is built for. Length-bound weights
  // (Linformer, Synthesizer) are sized to it and random patterns are drawn
  // over it, so shorter inputs see a consistent top-left slice. 0 means "the
  // current sequence length".
  std::size_t max_len = 0;
  std::uint64_t seed = 0;

  // Throws UsageError when a field relevant to `kind` is invalid for seq_len.
  void validate(std::size_t seq_len) const;
  std::size_t context_len(std::size_t seq_len) const { return max_len == 0 ? seq_len : max_len; }
};

// Query-key adjacency; allowed(i, j) iff query i may attend to key j.
struct PatternMask {
  std::size_t seq_len = 0;
  std::vector<std::uint8_t> allowed;

  bool at(std::size_t i, std::size_t j) const { return allowed[i * seq_len + j] != 0; }
  std::size_t row_count(std::size_t i) const;
};

// Banded/strided/global/random layouts for Local, Sparse, Longformer and
// Bigbird:
//   Local      |i - j| <= window / 2
//   Sparse     Local band plus every key j with j % window == 0
//   Longformer Local band plus rows and columns 0..num_global-1
//   Bigbird    Longformer plus num_random keys per row drawn from
//              Rng(seed).split(i).uniform_int(context_len)
PatternMask build_pattern_mask(AttentionKind kind, const AttentionConfig& cfg, std::size_t seq_len);

// Random keys of one Bigbird row before cropping to the sequence.
std::vector<std::size_t> bigbird_random_keys(const AttentionConfig& cfg, std::size_t row,
                                             std::size_t context_len);

// Merges an optional pattern with key padding into a per-group mask. Returns
// an empty mask (groups == 0) when nothing is masked.
AttentionMask combine_masks(const PatternMask* pattern, std::size_t groups, std::size_t seq_len,
                            std::span<const std::size_t> lengths);

// Softmax along rows of a rank-2 tensor; `mask` is row-major (rows, cols).
template <typename T>
Tensor<T> softmax_rows(const Tensor<T>& x, const std::vector<std::uint8_t>* mask = nullptr);

// softmax(Q K^T / sqrt(d)) V with an optional pattern applied pre-softmax.
template <typename T>
Tensor<T> dense_attention(const Tensor<T>& q, const Tensor<T>& k, const Tensor<T>& v,
                          const PatternMask* mask = nullptr,
                          std::span<const std::size_t> lengths = {});

// Same contract as dense_attention with the mask; built on the same masked
// kernel, so value equivalence is exact.
template <typename T>
Tensor<T> pattern_attention(const Tensor<T>& q, const Tensor<T>& k, const Tensor<T>& v,
                            const PatternMask& mask, std::span<const std::size_t> lengths = {});

// phi(Q) (phi(K)^T V) / (phi(Q) phi(K)^T 1). LinearTransformer uses
// phi(x) = elu(x) + 1; Performer uses positive random features
// phi(x) = exp(x W^T - |x|^2 / 2) / sqrt(m) on x scaled by d^(-1/4), with the
// rows of W drawn standard normal from cfg.seed.
template <typename T>
Tensor<T> kernel_attention(const Tensor<T>& q, const Tensor<T>& k, const Tensor<T>& v,
                           AttentionKind kind, const AttentionConfig& cfg,
                           std::span<const std::size_t> lengths = {});

// The (num_features, head_dim) Performer projection for cfg.seed.
template <typename T>
Tensor<T> performer_features(const AttentionConfig& cfg, std::size_t head_dim);

// Linformer: keys and values are compressed along the sequence axis by
// `projection` (context_len x proj_rank, top rows used) before dense attention.
template <typename T>
Tensor<T> lowrank_attention(const Tensor<T>& q, const Tensor<T>& k, const Tensor<T>& v,
                            const Tensor<T>& projection, const AttentionConfig& cfg,
                            std::span<const std::size_t> lengths = {});

// Learned Synthesizer weights. Dense mode uses the two-layer map
// relu(x w1 + b1) w2 + b2 producing heads * context_len logits per position;
// random mode uses free logits of shape (heads, context_len, context_len).
template <typename T>
struct SynthesizerWeights {
  Tensor<T> w1, b1, w2, b2;
  Tensor<T> logits;
};

// x: block input (batch, seq, embed); v: (batch * heads, seq, head_dim).
template <typename T>
Tensor<T> synthetic_attention(const Tensor<T>& x, const Tensor<T>& v,
                              const SynthesizerWeights<T>& weights, std::size_t heads,
                              const AttentionConfig& cfg,
                              std::span<const std::size_t> lengths = {});

// Reformer-style bucketed attention. Each round r hashes a vector x to
// argmax_b (x . R_r[:, b]) (ties to the lowest b) with
// num_buckets = max(1, context_len / bucket_size); a query attends to every
// key sharing its bucket in some round, and always to itself.
template <typename T>
Tensor<T> lsh_attention(const Tensor<T>& q, const Tensor<T>& k, const Tensor<T>& v,
                        const AttentionConfig& cfg, std::span<const std::size_t> lengths = {});

std::size_t lsh_num_buckets(const AttentionConfig& cfg, std::size_t seq_len);
// Hyperplanes of round `round`: (head_dim, num_buckets), row-major.
template <typename T>
std::vector<T> lsh_hyperplanes(const AttentionConfig& cfg, std::size_t head_dim,
                               std::size_t num_buckets, std::size_t round);
// The bucket-union mask lsh_attention applies (before key padding).
template <typename T>
AttentionMask lsh_bucket_mask(const Tensor<T>& q, const Tensor<T>& k, const AttentionConfig& cfg);

}  // namespace hetnas

#endif  // HETNAS_ATTENTION_HPP_
