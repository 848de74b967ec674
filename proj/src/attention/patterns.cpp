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
#include <cctype>
#include <string>

#include "hetnas/attention.hpp"
#include "hetnas/error.hpp"
#include "hetnas/rng.hpp"

namespace hetnas {

std::string_view kind_name(AttentionKind kind) {
  switch (kind) {
    case AttentionKind::kBigbird: return "Bigbird";
    case AttentionKind::kLinear: return "Linear";
    case AttentionKind::kLinformer: return "Linformer";
    case AttentionKind::kLocal: return "Local";
    case AttentionKind::kLongformer: return "Longformer";
    case AttentionKind::kPerformer: return "Performer";
    case AttentionKind::kReformer: return "Reformer";
    case AttentionKind::kSparse: return "Sparse";
    case AttentionKind::kSynthesizer: return "Synthesizer";
    case AttentionKind::kDense: return "Dense";
  }
  return "?";
}

AttentionKind parse_kind(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "lineartransformer") lower = "linear";
  if (lower == "sparsetransformer") lower = "sparse";
  for (int i = 0; i <= static_cast<int>(AttentionKind::kDense); ++i) {
    const auto kind = static_cast<AttentionKind>(i);
    std::string candidate(kind_name(kind));
    std::transform(candidate.begin(), candidate.end(), candidate.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (candidate == lower) return kind;
  }
  throw UsageError("unknown attention kind '" + std::string(name) + "'");
}

namespace {

bool uses_window(AttentionKind kind) {
  return kind == AttentionKind::kLocal || kind == AttentionKind::kSparse ||
         kind == AttentionKind::kLongformer || kind == AttentionKind::kBigbird;
}

}  // namespace

void AttentionConfig::validate(std::size_t seq_len) const {
  if (seq_len == 0) throw UsageError("attention: sequence length must be positive");
  if (max_len != 0 && seq_len > max_len) {
    throw UsageError("attention: sequence length " + std::to_string(seq_len) +
                     " exceeds the configured maximum " + std::to_string(max_len));
  }
  const std::size_t ctx = context_len(seq_len);
  if (uses_window(kind) && window == 0) throw UsageError("attention: window must be >= 1");
  switch (kind) {
    case AttentionKind::kLinformer:
      if (proj_rank == 0) throw UsageError("attention: proj_rank must be >= 1");
      if (proj_rank > ctx) {
        throw UsageError("attention: proj_rank " + std::to_string(proj_rank) +
                         " exceeds context length " + std::to_string(ctx));
      }
      break;
    case AttentionKind::kPerformer:
      if (num_features == 0) throw UsageError("attention: num_features must be >= 1");
      break;
    case AttentionKind::kReformer:
      if (num_hashes == 0) throw UsageError("attention: num_hashes must be >= 1");
      if (bucket_size == 0) throw UsageError("attention: bucket_size must be >= 1");
      break;
    default:
      break;
  }
}

std::size_t PatternMask::row_count(std::size_t i) const {
  std::size_t n = 0;
  for (std::size_t j = 0; j < seq_len; ++j) n += at(i, j) ? 1 : 0;
  return n;
}

std::vector<std::size_t> bigbird_random_keys(const AttentionConfig& cfg, std::size_t row,
                                             std::size_t context_len) {
  Rng rng = Rng(cfg.seed).split(row);
  std::vector<std::size_t> keys(cfg.num_random);
  for (auto& k : keys) k = rng.uniform_int(context_len);
  return keys;
}

PatternMask build_pattern_mask(AttentionKind kind, const AttentionConfig& cfg, std::size_t seq_len) {
  if (!uses_window(kind)) {
    throw UsageError("build_pattern_mask: " + std::string(kind_name(kind)) + " has no fixed pattern");
  }
  AttentionConfig checked = cfg;
  checked.kind = kind;
  checked.validate(seq_len);

  PatternMask mask;
  mask.seq_len = seq_len;
  mask.allowed.assign(seq_len * seq_len, 0);
  auto allow = [&](std::size_t i, std::size_t j) {
    if (i < seq_len && j < seq_len) mask.allowed[i * seq_len + j] = 1;
  };

  const std::size_t half = cfg.window / 2;
  for (std::size_t i = 0; i < seq_len; ++i) {
    const std::size_t lo = i > half ? i - half : 0;
    const std::size_t hi = std::min(seq_len - 1, i + half);
    for (std::size_t j = lo; j <= hi; ++j) allow(i, j);
  }
  if (kind == AttentionKind::kSparse) {
    for (std::size_t i = 0; i < seq_len; ++i)
      for (std::size_t j = 0; j < seq_len; j += cfg.window) allow(i, j);
  }
  if (kind == AttentionKind::kLongformer || kind == AttentionKind::kBigbird) {
    for (std::size_t g = 0; g < std::min(cfg.num_global, seq_len); ++g) {
      for (std::size_t j = 0; j < seq_len; ++j) {
        allow(g, j);
        allow(j, g);
      }
    }
  }
  if (kind == AttentionKind::kBigbird) {
    const std::size_t ctx = cfg.context_len(seq_len);
    for (std::size_t i = 0; i < seq_len; ++i) {
      for (std::size_t j : bigbird_random_keys(cfg, i, ctx)) allow(i, j);
    }
  }
  return mask;
}

AttentionMask combine_masks(const PatternMask* pattern, std::size_t groups, std::size_t seq_len,
                            std::span<const std::size_t> lengths) {
  AttentionMask out;
  if (pattern && pattern->seq_len != seq_len) {
    throw UsageError("attention: pattern mask is " + std::to_string(pattern->seq_len) +
                     " wide but the sequence has " + std::to_string(seq_len) + " positions");
  }
  if (!lengths.empty() && lengths.size() != groups) {
    throw UsageError("attention: expected " + std::to_string(groups) + " lengths, got " +
                     std::to_string(lengths.size()));
  }
  const bool padded = std::any_of(lengths.begin(), lengths.end(),
                                  [&](std::size_t len) { return len < seq_len; });
  if (!pattern && !padded) return out;

  out.rows = seq_len;
  out.cols = seq_len;
  out.groups = padded ? groups : 1;
  out.allowed.assign(out.groups * seq_len * seq_len, 1);
  for (std::size_t g = 0; g < out.groups; ++g) {
    const std::size_t len = padded ? std::min(lengths[g], seq_len) : seq_len;
    if (len == 0) throw UsageError("attention: a sequence has no valid positions");
    std::uint8_t* base = out.allowed.data() + g * seq_len * seq_len;
    for (std::size_t i = 0; i < seq_len; ++i) {
      for (std::size_t j = 0; j < seq_len; ++j) {
        std::uint8_t ok = pattern ? pattern->allowed[i * seq_len + j] : 1;
        if (i >= len) ok = (i == j);
        else if (j >= len) ok = 0;
        base[i * seq_len + j] = ok;
      }
    }
  }
  return out;
}

}  // namespace hetnas
