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

#include <algorithm>
#include <cmath>
#include <string>

#include "hetnas/attention.hpp"
#include "hetnas/error.hpp"
#include "hetnas/rng.hpp"

namespace hetnas {

namespace {

template <typename T>
void check_qkv(const Tensor<T>& q, const Tensor<T>& k, const Tensor<T>& v, const char* op) {
  if (q.rank() != 3 || k.rank() != 3 || v.rank() != 3) {
    throw UsageError(std::string(op) + ": expects (groups, seq, head_dim) tensors");
  }
  if (q.dim(0) != k.dim(0) || k.dim(0) != v.dim(0) || k.dim(1) != v.dim(1) || q.dim(2) != k.dim(2)) {
    throw UsageError(std::string(op) + ": incompatible shapes q" + shape_str(q.shape()) + " k" +
                     shape_str(k.shape()) + " v" + shape_str(v.shape()));
  }
  if (q.dim(2) == 0) throw UsageError(std::string(op) + ": head_dim must be positive");
}

// softmax(q k^T * scale) v under an optional mask.
template <typename T>
Tensor<T> masked_dot_attention(const Tensor<T>& q, const Tensor<T>& k, const Tensor<T>& v,
                               const AttentionMask* mask) {
  const T s = T(1) / std::sqrt(static_cast<T>(q.dim(2)));
  auto scores = scale(bmm(q, k, false, true), s);
  auto weights = masked_softmax(scores, mask);
  return bmm(weights, v);
}

template <typename T>
Tensor<T> ones_column(std::size_t groups, std::size_t rows) {
  return Tensor<T>::full({groups, rows, 1}, T(1));
}

// Row-normalized linear attention given feature maps of queries and keys.
template <typename T>
Tensor<T> feature_attention(const Tensor<T>& phi_q, const Tensor<T>& phi_k, const Tensor<T>& v,
                            std::span<const std::size_t> lengths) {
  const std::size_t g = phi_q.dim(0), s = phi_q.dim(1);
  auto phi_k_valid = lengths.empty() ? phi_k : mask_rows(phi_k, lengths);
  auto kv = bmm(phi_k_valid, v, true, false);                                   // (g, m, d)
  auto numerator = bmm(phi_q, kv);                                              // (g, s, d)
  auto key_sum = bmm(phi_k_valid, ones_column<T>(g, phi_k.dim(1)), true, false);  // (g, m, 1)
  auto denominator = reshape(bmm(phi_q, key_sum), {g, s});                      // (g, s)
  for (T d : denominator.data()) {
    if (!(d > T(0))) throw RuntimeError("kernel attention: non-positive normalizer");
  }
  return div_rows(numerator, denominator);
}

}  // namespace

template <typename T>
Tensor<T> softmax_rows(const Tensor<T>& x, const std::vector<std::uint8_t>* mask) {
  if (x.rank() != 2) throw UsageError("softmax_rows expects a rank-2 tensor");
  const std::size_t rows = x.dim(0), cols = x.dim(1);
  AttentionMask m;
  if (mask) {
    if (mask->size() != rows * cols) throw UsageError("softmax_rows: mask shape mismatch");
    m.groups = 1;
    m.rows = rows;
    m.cols = cols;
    m.allowed = *mask;
  }
  auto y = masked_softmax(reshape(x, {1, rows, cols}), mask ? &m : nullptr);
  return reshape(y, {rows, cols});
}

template <typename T>
Tensor<T> dense_attention(const Tensor<T>& q, const Tensor<T>& k, const Tensor<T>& v,
                          const PatternMask* mask, std::span<const std::size_t> lengths) {
  check_qkv(q, k, v, "dense_attention");
  if (q.dim(1) != k.dim(1) && (mask || !lengths.empty())) {
    throw UsageError("dense_attention: masks require equal query and key lengths");
  }
  auto combined = combine_masks(mask, q.dim(0), k.dim(1), lengths);
  return masked_dot_attention(q, k, v, combined.groups ? &combined : nullptr);
}

template <typename T>
Tensor<T> pattern_attention(const Tensor<T>& q, const Tensor<T>& k, const Tensor<T>& v,
                            const PatternMask& mask, std::span<const std::size_t> lengths) {
  check_qkv(q, k, v, "pattern_attention");
  return dense_attention(q, k, v, &mask, lengths);
}

template <typename T>
Tensor<T> performer_features(const AttentionConfig& cfg, std::size_t head_dim) {
  if (cfg.num_features == 0) throw UsageError("performer: num_features must be >= 1");
  Rng rng = Rng(cfg.seed).split(0x5045);
  std::vector<T> w(cfg.num_features * head_dim);
  for (auto& x : w) x = static_cast<T>(rng.normal());
  return Tensor<T>::from({cfg.num_features, head_dim}, std::move(w));
}

template <typename T>
Tensor<T> kernel_attention(const Tensor<T>& q, const Tensor<T>& k, const Tensor<T>& v,
                           AttentionKind kind, const AttentionConfig& cfg,
                           std::span<const std::size_t> lengths) {
  check_qkv(q, k, v, "kernel_attention");
  if (!lengths.empty() && lengths.size() != q.dim(0)) throw UsageError("kernel_attention: bad lengths");
  if (kind == AttentionKind::kLinear) {
    return feature_attention(elu_plus_one(q), elu_plus_one(k), v, lengths);
  }
  if (kind != AttentionKind::kPerformer) {
    throw UsageError("kernel_attention: unsupported kind " + std::string(kind_name(kind)));
  }
  const std::size_t d = q.dim(2);
  const std::size_t m = cfg.num_features;
  if (m == 0) throw UsageError("kernel_attention: Performer requires num_features >= 1");
  // Transposed projection (d, m) so features are one matmul.
  const auto w = performer_features<T>(cfg, d);
  std::vector<T> wt(d * m);
  for (std::size_t f = 0; f < m; ++f)
    for (std::size_t j = 0; j < d; ++j) wt[j * m + f] = w.data()[f * d + j];
  const auto proj = Tensor<T>::from({d, m}, std::move(wt));
  const T data_scale = T(1) / std::sqrt(std::sqrt(static_cast<T>(d)));
  const T feature_scale = T(1) / std::sqrt(static_cast<T>(m));

  const std::size_t g = q.dim(0), s = q.dim(1);
  auto exponent = [&](const Tensor<T>& x) {
    auto xs = scale(x, data_scale);
    auto half_sq = scale(row_sum(mul(xs, xs)), T(0.5));  // (g, s)
    return sub_rows(linear(xs, proj), half_sq);          // (g, s, m)
  };
  // Shifts before exp to avoid underflow. A query's shift cancels in its own
  // ratio; keys share one shift per group (max over valid rows), so it
  // cancels too. Padded keys get their own row max and are masked later.
  auto row_max = [&](const Tensor<T>& e) {
    std::vector<T> out(g * s);
    for (std::size_t r = 0; r < g * s; ++r) {
      out[r] = *std::max_element(e.data().begin() + static_cast<std::ptrdiff_t>(r * m),
                                 e.data().begin() + static_cast<std::ptrdiff_t>((r + 1) * m));
    }
    return out;
  };
  auto eq = exponent(q);
  auto ek = exponent(k);
  const auto q_shift = row_max(eq);
  auto k_shift = row_max(ek);
  for (std::size_t gi = 0; gi < g; ++gi) {
    const std::size_t len = lengths.empty() ? s : std::min(lengths[gi], s);
    if (len == 0) continue;
    const T group_max = *std::max_element(k_shift.begin() + static_cast<std::ptrdiff_t>(gi * s),
                                          k_shift.begin() + static_cast<std::ptrdiff_t>(gi * s + len));
    for (std::size_t i = 0; i < len; ++i) k_shift[gi * s + i] = group_max;
  }
  auto phi_q = scale(exp(sub_rows(eq, Tensor<T>::from({g, s}, q_shift))), feature_scale);
  auto phi_k = scale(exp(sub_rows(ek, Tensor<T>::from({g, s}, k_shift))), feature_scale);
  return feature_attention(phi_q, phi_k, v, lengths);
}

template <typename T>
Tensor<T> lowrank_attention(const Tensor<T>& q, const Tensor<T>& k, const Tensor<T>& v,
                            const Tensor<T>& projection, const AttentionConfig& cfg,
                            std::span<const std::size_t> lengths) {
  check_qkv(q, k, v, "lowrank_attention");
  const std::size_t s = k.dim(1);
  if (cfg.proj_rank == 0) throw UsageError("lowrank_attention: proj_rank must be >= 1");
  if (projection.rank() != 2 || projection.dim(1) != cfg.proj_rank) {
    throw UsageError("lowrank_attention: projection must be (context_len, proj_rank)");
  }
  if (s > projection.dim(0)) {
    throw UsageError("lowrank_attention: sequence length " + std::to_string(s) +
                     " exceeds the projection length " + std::to_string(projection.dim(0)));
  }
  auto kk = lengths.empty() ? k : mask_rows(k, lengths);
  auto vv = lengths.empty() ? v : mask_rows(v, lengths);
  return masked_dot_attention(q, project_sequence(kk, projection), project_sequence(vv, projection),
                              static_cast<const AttentionMask*>(nullptr));
}

template <typename T>
Tensor<T> synthetic_attention(const Tensor<T>& x, const Tensor<T>& v,
                              const SynthesizerWeights<T>& weights, std::size_t heads,
                              const AttentionConfig& cfg, std::span<const std::size_t> lengths) {
  if (x.rank() != 3 || v.rank() != 3 || heads == 0 || v.dim(0) != x.dim(0) * heads ||
      v.dim(1) != x.dim(1)) {
    throw UsageError("synthetic_attention: x " + shape_str(x.shape()) + " and v " +
                     shape_str(v.shape()) + " disagree");
  }
  const std::size_t b = x.dim(0), s = x.dim(1);
  const std::size_t ctx = cfg.context_len(s);
  if (s > ctx) {
    throw UsageError("synthetic_attention: sequence length " + std::to_string(s) +
                     " exceeds the trained maximum " + std::to_string(ctx));
  }
  Tensor<T> logits;
  if (cfg.synth_mode == SynthMode::kDense) {
    if (weights.w2.dim(1) != heads * ctx) throw UsageError("synthetic_attention: w2 does not match heads * context");
    auto hidden = relu(linear(x, weights.w1, weights.b1));
    logits = slice_head_columns(linear(hidden, weights.w2, weights.b2), heads, s);
  } else {
    if (weights.logits.rank() != 3 || weights.logits.dim(0) != heads || weights.logits.dim(1) != ctx) {
      throw UsageError("synthetic_attention: logits must be (heads, context, context)");
    }
    logits = tile_head_blocks(weights.logits, b, s);
  }
  auto mask = combine_masks(nullptr, b * heads, s, lengths);
  return bmm(masked_softmax(logits, mask.groups ? &mask : nullptr), v);
}

std::size_t lsh_num_buckets(const AttentionConfig& cfg, std::size_t seq_len) {
  if (cfg.bucket_size == 0) throw UsageError("lsh: bucket_size must be >= 1");
  return std::max<std::size_t>(1, cfg.context_len(seq_len) / cfg.bucket_size);
}

template <typename T>
std::vector<T> lsh_hyperplanes(const AttentionConfig& cfg, std::size_t head_dim,
                               std::size_t num_buckets, std::size_t round) {
  Rng rng = Rng(cfg.seed).split(0x4C5348 + round);
  std::vector<T> r(head_dim * num_buckets);
  for (auto& x : r) x = static_cast<T>(rng.normal());
  return r;
}

namespace {

template <typename T>
std::vector<std::size_t> hash_rows(std::span<const T> x, std::size_t rows, std::size_t d,
                                   const std::vector<T>& planes, std::size_t nb) {
  std::vector<std::size_t> out(rows, 0);
  if (nb == 1) return out;
  for (std::size_t r = 0; r < rows; ++r) {
    std::size_t best = 0;
    T best_val = T(0);
    for (std::size_t b = 0; b < nb; ++b) {
      T dot = T(0);
      for (std::size_t j = 0; j < d; ++j) dot += x[r * d + j] * planes[j * nb + b];
      if (b == 0 || dot > best_val) {
        best = b;
        best_val = dot;
      }
    }
    out[r] = best;
  }
  return out;
}

}  // namespace

template <typename T>
AttentionMask lsh_bucket_mask(const Tensor<T>& q, const Tensor<T>& k, const AttentionConfig& cfg) {
  check_qkv(q, k, k, "lsh_attention");
  if (cfg.num_hashes == 0) throw UsageError("lsh: num_hashes must be >= 1");
  const std::size_t g = q.dim(0), s = q.dim(1), d = q.dim(2);
  if (k.dim(1) != s) throw UsageError("lsh: queries and keys must have equal length");
  const std::size_t nb = lsh_num_buckets(cfg, s);

  AttentionMask mask;
  mask.groups = g;
  mask.rows = s;
  mask.cols = s;
  mask.allowed.assign(g * s * s, 0);
  for (std::size_t round = 0; round < cfg.num_hashes; ++round) {
    const auto planes = lsh_hyperplanes<T>(cfg, d, nb, round);
    const auto qb = hash_rows<T>(q.data(), g * s, d, planes, nb);
    const auto kb = hash_rows<T>(k.data(), g * s, d, planes, nb);
    for (std::size_t gi = 0; gi < g; ++gi)
      for (std::size_t i = 0; i < s; ++i)
        for (std::size_t j = 0; j < s; ++j)
          if (qb[gi * s + i] == kb[gi * s + j]) mask.allowed[(gi * s + i) * s + j] = 1;
  }
  for (std::size_t gi = 0; gi < g; ++gi)
    for (std::size_t i = 0; i < s; ++i) mask.allowed[(gi * s + i) * s + i] = 1;
  return mask;
}

template <typename T>
Tensor<T> lsh_attention(const Tensor<T>& q, const Tensor<T>& k, const Tensor<T>& v,
                        const AttentionConfig& cfg, std::span<const std::size_t> lengths) {
  check_qkv(q, k, v, "lsh_attention");
  if (cfg.bucket_size == 0) throw UsageError("lsh_attention: bucket_size must be >= 1");
  auto mask = lsh_bucket_mask(q, k, cfg);
  const std::size_t g = q.dim(0), s = q.dim(1);
  if (!lengths.empty()) {
    if (lengths.size() != g) throw UsageError("lsh_attention: bad lengths");
    for (std::size_t gi = 0; gi < g; ++gi) {
      const std::size_t len = lengths[gi];
      for (std::size_t i = 0; i < s; ++i) {
        for (std::size_t j = 0; j < s; ++j) {
          auto& a = mask.allowed[(gi * s + i) * s + j];
          if (i >= len) a = (i == j);
          else if (j >= len) a = 0;
        }
      }
    }
  }
  return masked_dot_attention(q, k, v, &mask);
}

#define HETNAS_INSTANTIATE_ATTENTION(T)                                                          \
  template Tensor<T> softmax_rows(const Tensor<T>&, const std::vector<std::uint8_t>*);           \
  template Tensor<T> dense_attention(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&,       \
                                     const PatternMask*, std::span<const std::size_t>);          \
  template Tensor<T> pattern_attention(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&,     \
                                       const PatternMask&, std::span<const std::size_t>);        \
  template Tensor<T> kernel_attention(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&,      \
                                      AttentionKind, const AttentionConfig&,                     \
                                      std::span<const std::size_t>);                             \
  template Tensor<T> performer_features(const AttentionConfig&, std::size_t);                    \
  template Tensor<T> lowrank_attention(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&,     \
                                       const Tensor<T>&, const AttentionConfig&,                 \
                                       std::span<const std::size_t>);                            \
  template Tensor<T> synthetic_attention(const Tensor<T>&, const Tensor<T>&,                     \
                                         const SynthesizerWeights<T>&, std::size_t,              \
                                         const AttentionConfig&, std::span<const std::size_t>);  \
  template std::vector<T> lsh_hyperplanes<T>(const AttentionConfig&, std::size_t, std::size_t,   \
                                             std::size_t);                                       \
  template AttentionMask lsh_bucket_mask(const Tensor<T>&, const Tensor<T>&,                     \
                                         const AttentionConfig&);                                \
  template Tensor<T> lsh_attention(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&,         \
                                   const AttentionConfig&, std::span<const std::size_t>);

HETNAS_INSTANTIATE_ATTENTION(float)
HETNAS_INSTANTIATE_ATTENTION(double)

}  // namespace hetnas
