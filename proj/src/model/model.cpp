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

#include "hetnas/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "hetnas/error.hpp"

namespace hetnas {

void ModelConfig::validate() const {
  if (embed_dim < 1 || head_dim < 1 || ffn_hidden < 1 || num_layers < 1) {
    throw UsageError("model: embed_dim, head_dim, ffn_hidden and num_layers must all be >= 1");
  }
  if (vocab_size <= static_cast<std::size_t>(kFirstTaskToken)) {
    throw UsageError("model: vocab_size must exceed the reserved PAD/CLS/SEP ids");
  }
  if (max_seq_len < 1) throw UsageError("model: max_seq_len must be >= 1");
  if (num_classes < 2) throw UsageError("model: num_classes must be >= 2");
  if (dropout < 0.0 || dropout >= 1.0) throw UsageError("model: dropout must be in [0, 1)");
}

namespace {

template <typename T>
Tensor<T> uniform_param(Shape shape, std::size_t fan_in, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  std::vector<T> v(numel(shape));
  for (auto& x : v) x = static_cast<T>(rng.uniform(-bound, bound));
  return Tensor<T>::from(std::move(shape), std::move(v), true);
}

template <typename T>
Tensor<T> normal_param(Shape shape, double stddev, Rng& rng) {
  std::vector<T> v(numel(shape));
  for (auto& x : v) x = static_cast<T>(rng.normal() * stddev);
  return Tensor<T>::from(std::move(shape), std::move(v), true);
}

template <typename T>
Tensor<T> zero_param(Shape shape) {
  return Tensor<T>::zeros(std::move(shape), true);
}

template <typename T>
Tensor<T> const_param(Shape shape, T value) {
  return Tensor<T>::full(std::move(shape), value, true);
}

}  // namespace

// ---- AttentionBlock --------------------------------------------------------

template <typename T>
AttentionBlock<T>::AttentionBlock(AttentionKind kind, std::size_t heads, const ModelConfig& cfg,
                                  std::uint64_t seed)
    : config_(cfg.attention), heads_(heads), head_dim_(cfg.head_dim) {
  if (heads == 0) throw UsageError("attention block needs at least one head");
  config_.kind = kind;
  config_.max_len = cfg.context_len();
  config_.seed = Rng::mix64(seed ^ 0xA77E);
  config_.validate(cfg.context_len());

  Rng rng(seed);
  const std::size_t e = cfg.embed_dim, inner = heads * cfg.head_dim, ctx = cfg.context_len();
  if (kind != AttentionKind::kSynthesizer) {
    wq = uniform_param<T>({e, inner}, e, rng);
    bq = zero_param<T>({inner});
    wk = uniform_param<T>({e, inner}, e, rng);
    bk = zero_param<T>({inner});
  }
  wv = uniform_param<T>({e, inner}, e, rng);
  bv = zero_param<T>({inner});
  wo = uniform_param<T>({inner, e}, inner, rng);
  bo = zero_param<T>({e});

  switch (kind) {
    case AttentionKind::kLinformer:
      seq_projection = uniform_param<T>({ctx, config_.proj_rank}, ctx, rng);
      break;
    case AttentionKind::kSynthesizer:
      if (config_.synth_mode == SynthMode::kDense) {
        synth.w1 = uniform_param<T>({e, e}, e, rng);
        synth.b1 = zero_param<T>({e});
        synth.w2 = uniform_param<T>({e, heads * ctx}, e, rng);
        synth.b2 = zero_param<T>({heads * ctx});
      } else {
        synth.logits = uniform_param<T>({heads, ctx, ctx}, ctx, rng);
      }
      break;
    default:
      break;
  }
}

template <typename T>
void AttentionBlock<T>::zero_output() {
  std::fill(wo.mutable_data().begin(), wo.mutable_data().end(), T(0));
  std::fill(bo.mutable_data().begin(), bo.mutable_data().end(), T(0));
}

template <typename T>
std::vector<NamedTensor<T>> AttentionBlock<T>::parameters(const std::string& prefix) const {
  std::vector<NamedTensor<T>> out;
  auto add = [&](const char* name, const Tensor<T>& t) {
    if (t.defined()) out.push_back({prefix + name, t});
  };
  add("wq", wq);
  add("bq", bq);
  add("wk", wk);
  add("bk", bk);
  add("wv", wv);
  add("bv", bv);
  add("wo", wo);
  add("bo", bo);
  add("seq_projection", seq_projection);
  add("synth.w1", synth.w1);
  add("synth.b1", synth.b1);
  add("synth.w2", synth.w2);
  add("synth.b2", synth.b2);
  add("synth.logits", synth.logits);
  return out;
}

template <typename T>
Tensor<T> AttentionBlock<T>::attend(const Tensor<T>& x, const Tensor<T>& q, const Tensor<T>& k,
                                    const Tensor<T>& v, std::span<const std::size_t> group_lengths,
                                    std::size_t seq) const {
  switch (config_.kind) {
    case AttentionKind::kDense:
      return dense_attention(q, k, v, nullptr, group_lengths);
    case AttentionKind::kLocal:
    case AttentionKind::kSparse:
    case AttentionKind::kLongformer:
    case AttentionKind::kBigbird: {
      const auto pattern = build_pattern_mask(config_.kind, config_, seq);
      return pattern_attention(q, k, v, pattern, group_lengths);
    }
    case AttentionKind::kLinear:
    case AttentionKind::kPerformer:
      return kernel_attention(q, k, v, config_.kind, config_, group_lengths);
    case AttentionKind::kLinformer:
      return lowrank_attention(q, k, v, seq_projection, config_, group_lengths);
    case AttentionKind::kReformer:
      return lsh_attention(q, k, v, config_, group_lengths);
    case AttentionKind::kSynthesizer:
      return synthetic_attention(x, v, synth, heads_, config_, group_lengths);
  }
  throw UsageError("unsupported attention kind");
}

template <typename T>
Tensor<T> AttentionBlock<T>::forward(const Tensor<T>& x, std::span<const std::size_t> lengths) const {
  if (!active_) throw UsageError("attention block is masked out");
  if (x.rank() != 3) throw UsageError("block forward expects (batch, seq, embed)");
  const std::size_t b = x.dim(0), s = x.dim(1);
  if (s > config_.max_len) {
    throw UsageError("sequence length " + std::to_string(s) + " exceeds the maximum " +
                     std::to_string(config_.max_len));
  }
  std::vector<std::size_t> group_lengths(b * heads_, s);
  if (!lengths.empty()) {
    if (lengths.size() != b) throw UsageError("block forward: one length per example expected");
    for (std::size_t i = 0; i < b; ++i)
      for (std::size_t h = 0; h < heads_; ++h) group_lengths[i * heads_ + h] = lengths[i];
  }
  Tensor<T> q, k;
  if (config_.kind != AttentionKind::kSynthesizer) {
    q = split_heads(linear(x, wq, bq), heads_);
    k = split_heads(linear(x, wk, bk), heads_);
  }
  auto v = split_heads(linear(x, wv, bv), heads_);
  auto attended = attend(x, q, k, v, group_lengths, s);
  return linear(merge_heads(attended, heads_), wo, bo);
}

// ---- SupernetLayer ---------------------------------------------------------

template <typename T>
SupernetLayer<T>::SupernetLayer(std::vector<AttentionBlock<T>> blocks) : blocks_(std::move(blocks)) {
  if (blocks_.empty()) throw UsageError("a layer needs at least one attention block");
}

template <typename T>
std::size_t SupernetLayer<T>::active_count() const {
  return static_cast<std::size_t>(
      std::count_if(blocks_.begin(), blocks_.end(), [](const auto& b) { return b.active(); }));
}

template <typename T>
std::vector<std::size_t> SupernetLayer<T>::active_indices() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < blocks_.size(); ++i)
    if (blocks_[i].active()) out.push_back(i);
  return out;
}

template <typename T>
void SupernetLayer<T>::mask_block(std::size_t index) {
  if (index >= blocks_.size()) throw UsageError("mask_block: index out of range");
  if (!blocks_[index].active()) return;
  if (active_count() == 1) throw UsageError("mask_block: cannot mask the last active block");
  blocks_[index].set_active(false);
}

template <typename T>
void SupernetLayer<T>::unmask_block(std::size_t index) {
  if (index >= blocks_.size()) throw UsageError("unmask_block: index out of range");
  blocks_[index].set_active(true);
}

template <typename T>
void SupernetLayer<T>::remove_block(std::size_t index) {
  if (index >= blocks_.size()) throw UsageError("remove_block: index out of range");
  if (blocks_[index].active() && active_count() == 1) {
    throw UsageError("remove_block: cannot remove the last active block");
  }
  blocks_.erase(blocks_.begin() + static_cast<std::ptrdiff_t>(index));
}

template <typename T>
Tensor<T> SupernetLayer<T>::forward(const Tensor<T>& x, std::span<const std::size_t> lengths,
                                    Rng* sample_rng) const {
  auto used = active_indices();
  if (used.empty()) throw UsageError("supernet layer has no active blocks");
  if (sample_rng && sample_size) {
    if (*sample_size == 0) throw UsageError("block sample size must be >= 1");
    const std::size_t k = std::min(*sample_size, used.size());
    for (std::size_t i = 0; i < k; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(sample_rng->uniform_int(used.size() - i));
      std::swap(used[i], used[j]);
    }
    used.resize(k);
    std::sort(used.begin(), used.end());
  }
  std::vector<Tensor<T>> outputs;
  outputs.reserve(used.size());
  for (std::size_t i : used) outputs.push_back(blocks_[i].forward(x, lengths));
  return mean_of<T>(outputs);
}

// ---- Model -----------------------------------------------------------------

template <typename T>
Model<T>::Model(const ModelConfig& cfg, const ArchitectureSpec& blocks, std::uint64_t seed)
    : config_(cfg), seed_(seed), train_rng_(Rng(seed).split(0x7EA1)) {
  config_.validate();
  if (blocks.layers.size() != cfg.num_layers) {
    throw UsageError("model: architecture has " + std::to_string(blocks.layers.size()) +
                     " layers but the config asks for " + std::to_string(cfg.num_layers));
  }
  Rng root(seed);
  Rng init = root.split(1);
  const std::size_t e = cfg.embed_dim;
  const double emb_std = 1.0 / std::sqrt(static_cast<double>(e));
  token_embedding = normal_param<T>({cfg.vocab_size, e}, emb_std, init);
  position_embedding = normal_param<T>({cfg.context_len(), e}, emb_std, init);

  for (std::size_t l = 0; l < blocks.layers.size(); ++l) {
    const auto& layer = blocks.layers[l];
    if (layer.empty()) throw UsageError("model: layer " + std::to_string(l) + " has no attention blocks");
    std::vector<AttentionBlock<T>> made;
    for (std::size_t i = 0; i < layer.size(); ++i) {
      const std::uint64_t block_seed = root.split(1000 + l * 1000 + i).next_u64();
      made.emplace_back(layer[i].kind, layer[i].heads, config_, block_seed);
    }
    layers_.emplace_back(std::move(made));

    FeedForward f;
    f.ln1_gain = const_param<T>({e}, T(1));
    f.ln1_bias = zero_param<T>({e});
    f.ln2_gain = const_param<T>({e}, T(1));
    f.ln2_bias = zero_param<T>({e});
    f.w1 = uniform_param<T>({e, cfg.ffn_hidden}, e, init);
    f.b1 = zero_param<T>({cfg.ffn_hidden});
    f.w2 = uniform_param<T>({cfg.ffn_hidden, e}, cfg.ffn_hidden, init);
    f.b2 = zero_param<T>({e});
    ffn.push_back(std::move(f));
  }
  final_gain = const_param<T>({e}, T(1));
  final_bias = zero_param<T>({e});
  classifier_w = uniform_param<T>({e, cfg.num_classes}, e, init);
  classifier_b = zero_param<T>({cfg.num_classes});
}

template <typename T>
Tensor<T> Model<T>::run(const TokenBatch& batch, bool training, Rng* rng) const {
  if (batch.rows == 0 || batch.width == 0 || batch.tokens.size() != batch.rows * batch.width ||
      batch.lengths.size() != batch.rows) {
    throw UsageError("model: malformed token batch");
  }
  if (batch.width > config_.max_seq_len) {
    throw UsageError("model: sequence of length " + std::to_string(batch.width) +
                     " exceeds max_seq_len " + std::to_string(config_.max_seq_len));
  }
  const std::size_t b = batch.rows, s = batch.width + 1, e = config_.embed_dim;
  std::vector<std::int32_t> ids(b * s);
  std::vector<std::size_t> lengths(b);
  for (std::size_t r = 0; r < b; ++r) {
    if (batch.lengths[r] > batch.width) throw UsageError("model: row length exceeds batch width");
    ids[r * s] = kClsId;
    for (std::size_t j = 0; j < batch.width; ++j) ids[r * s + 1 + j] = batch.tokens[r * batch.width + j];
    lengths[r] = batch.lengths[r] + 1;
  }

  auto x = reshape(embedding(token_embedding, ids), {b, s, e});
  x = add_tiled(x, take_rows(position_embedding, s));
  const double p = training ? config_.dropout : 0.0;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const auto& f = ffn[l];
    auto h = layer_norm(x, f.ln1_gain, f.ln1_bias);
    auto a = layers_[l].forward(h, lengths, training ? rng : nullptr);
    if (p > 0.0) a = dropout(a, p, *rng);
    x = add(x, a);
    auto h2 = layer_norm(x, f.ln2_gain, f.ln2_bias);
    auto y = linear(relu(linear(h2, f.w1, f.b1)), f.w2, f.b2);
    if (p > 0.0) y = dropout(y, p, *rng);
    x = add(x, y);
  }
  auto cls = select_position(layer_norm(x, final_gain, final_bias), 0);
  return linear(cls, classifier_w, classifier_b);
}

template <typename T>
Tensor<T> Model<T>::forward(const TokenBatch& batch, bool training) {
  return run(batch, training, training ? &train_rng_ : nullptr);
}

template <typename T>
Tensor<T> Model<T>::forward_eval(const TokenBatch& batch) const {
  return run(batch, false, nullptr);
}

template <typename T>
std::vector<T> Model<T>::classify(std::span<const std::int32_t> tokens) const {
  if (tokens.empty()) throw UsageError("classify: empty sequence");
  TokenBatch batch;
  batch.rows = 1;
  batch.width = tokens.size();
  batch.tokens.assign(tokens.begin(), tokens.end());
  batch.lengths = {tokens.size()};
  NoGradGuard no_grad;
  auto logits = forward_eval(batch);
  return {logits.data().begin(), logits.data().end()};
}

template <typename T>
ArchitectureSpec Model<T>::architecture() const {
  ArchitectureSpec spec;
  for (const auto& layer : layers_) {
    LayerSpec ls;
    for (std::size_t i : layer.active_indices()) ls.push_back({layer.block(i).kind(), layer.block(i).heads()});
    spec.layers.push_back(std::move(ls));
  }
  return spec.canonical();
}

template <typename T>
std::vector<NamedTensor<T>> Model<T>::parameters() const {
  std::vector<NamedTensor<T>> out;
  out.push_back({"embed.token", token_embedding});
  out.push_back({"embed.position", position_embedding});
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const std::string lp = "layers." + std::to_string(l) + ".";
    for (std::size_t i = 0; i < layers_[l].size(); ++i) {
      auto block = layers_[l].block(i).parameters(lp + "blocks." + std::to_string(i) + ".");
      out.insert(out.end(), block.begin(), block.end());
    }
    const auto& f = ffn[l];
    out.push_back({lp + "ln1.gain", f.ln1_gain});
    out.push_back({lp + "ln1.bias", f.ln1_bias});
    out.push_back({lp + "ln2.gain", f.ln2_gain});
    out.push_back({lp + "ln2.bias", f.ln2_bias});
    out.push_back({lp + "ffn.w1", f.w1});
    out.push_back({lp + "ffn.b1", f.b1});
    out.push_back({lp + "ffn.w2", f.w2});
    out.push_back({lp + "ffn.b2", f.b2});
  }
  out.push_back({"final.gain", final_gain});
  out.push_back({"final.bias", final_bias});
  out.push_back({"classifier.w", classifier_w});
  out.push_back({"classifier.b", classifier_b});
  return out;
}

template <typename T>
std::vector<Tensor<T>> Model<T>::trainable_parameters(bool touched_only) const {
  std::vector<Tensor<T>> out;
  auto take = [&](const Tensor<T>& t) {
    if (!touched_only || t.has_grad()) out.push_back(t);
  };
  take(token_embedding);
  take(position_embedding);
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    for (std::size_t i = 0; i < layers_[l].size(); ++i) {
      const auto& block = layers_[l].block(i);
      if (block.frozen() || !block.active()) continue;
      for (const auto& p : block.parameters("")) take(p.tensor);
    }
    const auto& f = ffn[l];
    for (const auto* t : {&f.ln1_gain, &f.ln1_bias, &f.ln2_gain, &f.ln2_bias, &f.w1, &f.b1, &f.w2, &f.b2}) {
      take(*t);
    }
  }
  for (const auto* t : {&final_gain, &final_bias, &classifier_w, &classifier_b}) take(*t);
  return out;
}

template <typename T>
void Model<T>::zero_grad() {
  for (auto& p : parameters()) p.tensor.zero_grad();
}

template <typename T>
Model<T> derive_model(const ArchitectureSpec& spec, const ModelConfig& cfg, std::uint64_t seed) {
  if (spec.layers.empty()) throw UsageError("derive_model: empty architecture");
  ArchitectureSpec canon = spec.canonical();
  for (std::size_t l = 0; l < canon.layers.size(); ++l) {
    if (canon.total_heads(l) == 0) {
      throw UsageError("derive_model: layer " + std::to_string(l) + " has zero heads");
    }
  }
  if (canon.layers.size() == 1 && cfg.num_layers > 1) {
    canon.layers.assign(cfg.num_layers, canon.layers.front());
  }
  if (canon.layers.size() != cfg.num_layers) {
    throw UsageError("derive_model: architecture has " + std::to_string(canon.layers.size()) +
                     " layers, config expects " + std::to_string(cfg.num_layers));
  }
  return Model<T>(cfg, canon, seed);
}

template class AttentionBlock<float>;
template class AttentionBlock<double>;
template class SupernetLayer<float>;
template class SupernetLayer<double>;
template class Model<float>;
template class Model<double>;
template Model<float> derive_model<float>(const ArchitectureSpec&, const ModelConfig&, std::uint64_t);
template Model<double> derive_model<double>(const ArchitectureSpec&, const ModelConfig&, std::uint64_t);

}  // namespace hetnas
