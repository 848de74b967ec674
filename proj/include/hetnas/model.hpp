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

// Transformer encoder with averaged multi-block attention layers.
//
// A layer holds any number of attention blocks, each owning its projections.
// The attention sublayer output is the plain mean of the active blocks'
// outputs, so a search supernetwork and a derived heterogeneous model are the
// same type with different block lists.

#ifndef HETNAS_MODEL_HPP_
#define HETNAS_MODEL_HPP_

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hetnas/architecture.hpp"
#include "hetnas/attention.hpp"
#include "hetnas/batch.hpp"
#include "hetnas/rng.hpp"
#include "hetnas/tensor.hpp"

namespace hetnas {

struct ModelConfig {
  std::size_t embed_dim = 32;    // E
  std::size_t head_dim = 8;      // A
  std::size_t ffn_hidden = 64;   // M
  std::size_t num_layers = 1;    // L
  std::size_t vocab_size = 32;
  std::size_t max_seq_len = 64;  // tokens, excluding the prepended CLS
  std::size_t num_classes = 2;
  double dropout = 0.1;
  // Per-kind defaults; `kind`, `seed` and `max_len` are set per block.
  AttentionConfig attention;

  void validate() const;
  std::size_t context_len() const { return max_seq_len + 1; }
};

template <typename T>
struct NamedTensor {
  std::string name;
  Tensor<T> tensor;
};

template <typename T>
class AttentionBlock {
 public:
  AttentionBlock(AttentionKind kind, std::size_t heads, const ModelConfig& cfg, std::uint64_t seed);

  // x: (batch, seq, embed) with per-example valid lengths.
  Tensor<T> forward(const Tensor<T>& x, std::span<const std::size_t> lengths) const;

  AttentionKind kind() const { return config_.kind; }
  std::size_t heads() const { return heads_; }
  const AttentionConfig& attention_config() const { return config_; }

  bool active() const { return active_; }
  void set_active(bool active) { active_ = active; }
  // Frozen blocks are excluded from optimizer updates.
  bool frozen() const { return frozen_; }
  void set_frozen(bool frozen) { frozen_ = frozen; }
  // Sets the output projection (weights and bias) to zero.
  void zero_output();

  std::vector<NamedTensor<T>> parameters(const std::string& prefix) const;

  // Projection parameters, exposed for tests and the planted constructions.
  Tensor<T> wq, bq, wk, bk, wv, bv, wo, bo;
  Tensor<T> seq_projection;  // Linformer
  SynthesizerWeights<T> synth;

 private:
  Tensor<T> attend(const Tensor<T>& x, const Tensor<T>& q, const Tensor<T>& k, const Tensor<T>& v,
                   std::span<const std::size_t> group_lengths, std::size_t seq) const;

  AttentionConfig config_;
  std::size_t heads_;
  std::size_t head_dim_;
  bool active_ = true;
  bool frozen_ = false;
};

template <typename T>
class SupernetLayer {
 public:
  SupernetLayer() = default;
  explicit SupernetLayer(std::vector<AttentionBlock<T>> blocks);

  // Mean over active blocks. With `sample_rng` and a sample size set, the mean
  // is over a uniform draw of sample_size active blocks.
  Tensor<T> forward(const Tensor<T>& x, std::span<const std::size_t> lengths,
                    Rng* sample_rng = nullptr) const;

  void mask_block(std::size_t index);
  void unmask_block(std::size_t index);
  void remove_block(std::size_t index);

  std::size_t size() const { return blocks_.size(); }
  std::size_t active_count() const;
  std::vector<std::size_t> active_indices() const;
  AttentionBlock<T>& block(std::size_t i) { return blocks_.at(i); }
  const AttentionBlock<T>& block(std::size_t i) const { return blocks_.at(i); }

  std::optional<std::size_t> sample_size;

 private:
  std::vector<AttentionBlock<T>> blocks_;
};

template <typename T>
class Model {
 public:
  // One block per entry of each layer, in order; entries are not merged, so a
  // supernetwork may hold several blocks of one kind.
  Model(const ModelConfig& cfg, const ArchitectureSpec& blocks, std::uint64_t seed);

  const ModelConfig& config() const { return config_; }
  std::uint64_t seed() const { return seed_; }
  std::size_t num_layers() const { return layers_.size(); }
  SupernetLayer<T>& layer(std::size_t i) { return layers_.at(i); }
  const SupernetLayer<T>& layer(std::size_t i) const { return layers_.at(i); }

  // Class logits (rows, num_classes) read from the CLS position. Training mode
  // enables dropout and block sampling, drawing from the model's own stream.
  Tensor<T> forward(const TokenBatch& batch, bool training = false);
  Tensor<T> forward_eval(const TokenBatch& batch) const;

  // Logits of one unpadded token sequence.
  std::vector<T> classify(std::span<const std::int32_t> tokens) const;

  // Architecture of the active blocks, canonicalized.
  ArchitectureSpec architecture() const;

  std::vector<NamedTensor<T>> parameters() const;
  // Parameters the optimizer may touch: not frozen, and (when `touched_only`)
  // carrying a gradient from the latest backward pass.
  std::vector<Tensor<T>> trainable_parameters(bool touched_only = true) const;
  void zero_grad();

  // Embedding and classifier weights, exposed for tests.
  Tensor<T> token_embedding, position_embedding;
  Tensor<T> final_gain, final_bias, classifier_w, classifier_b;

  struct FeedForward {
    Tensor<T> ln1_gain, ln1_bias, ln2_gain, ln2_bias;
    Tensor<T> w1, b1, w2, b2;
  };
  std::vector<FeedForward> ffn;

 private:
  Tensor<T> run(const TokenBatch& batch, bool training, Rng* rng) const;

  ModelConfig config_;
  std::uint64_t seed_;
  std::vector<SupernetLayer<T>> layers_;
  Rng train_rng_;
};

// Fresh model for a searched architecture. A single-layer spec is stacked to
// cfg.num_layers; otherwise the layer counts must match.
template <typename T>
Model<T> derive_model(const ArchitectureSpec& spec, const ModelConfig& cfg, std::uint64_t seed);

// Versioned binary checkpoint (see docs/formats.md).
void save_checkpoint(const std::string& path, const Model<float>& model,
                     const std::map<std::string, std::string>& metadata = {});
Model<float> load_checkpoint(const std::string& path,
                             std::map<std::string, std::string>* metadata = nullptr);

}  // namespace hetnas

#endif  // HETNAS_MODEL_HPP_
