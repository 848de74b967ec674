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

#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <vector>

#include "hetnas/attention.hpp"
#include "hetnas/error.hpp"
#include "hetnas/rng.hpp"
#include "test_util.hpp"

namespace hetnas {
namespace {

using testing::max_abs_diff;
using testing::random_tensor;
using TF = Tensor<float>;
using TD = Tensor<double>;

// Direct evaluation of softmax(q k^T / sqrt(d)) v per group, optionally
// restricted to allowed(g, i, j).
template <typename Allowed>
std::vector<double> brute_attention(const TD& q, const TD& k, const TD& v, Allowed allowed) {
  const std::size_t g = q.dim(0), s = q.dim(1), d = q.dim(2), sk = k.dim(1), dv = v.dim(2);
  std::vector<double> out(g * s * dv, 0.0);
  for (std::size_t gi = 0; gi < g; ++gi) {
    for (std::size_t i = 0; i < s; ++i) {
      std::vector<double> w(sk, 0.0);
      double mx = -1e300;
      for (std::size_t j = 0; j < sk; ++j) {
        if (!allowed(gi, i, j)) continue;
        double dot = 0.0;
        for (std::size_t c = 0; c < d; ++c) dot += q.at({gi, i, c}) * k.at({gi, j, c});
        w[j] = dot / std::sqrt(static_cast<double>(d));
        mx = std::max(mx, w[j]);
      }
      double z = 0.0;
      for (std::size_t j = 0; j < sk; ++j) {
        w[j] = allowed(gi, i, j) ? std::exp(w[j] - mx) : 0.0;
        z += w[j];
      }
      for (std::size_t j = 0; j < sk; ++j)
        for (std::size_t c = 0; c < dv; ++c) out[(gi * s + i) * dv + c] += w[j] / z * v.at({gi, j, c});
    }
  }
  return out;
}

std::vector<double> brute_attention(const TD& q, const TD& k, const TD& v) {
  return brute_attention(q, k, v, [](std::size_t, std::size_t, std::size_t) { return true; });
}

AttentionConfig config_for(AttentionKind kind) {
  AttentionConfig c;
  c.kind = kind;
  c.seed = 11;
  return c;
}

// ---- dense ---------------------------------------------------------------

TEST(DenseAttention, SingleKeyReturnsValues) {
  Rng r(1);
  auto q = random_tensor<float>({2, 1, 4}, r), k = random_tensor<float>({2, 1, 4}, r),
       v = random_tensor<float>({2, 1, 4}, r);
  EXPECT_EQ(max_abs_diff(dense_attention(q, k, v).data(), v.data()), 0.0);
}

TEST(DenseAttention, IdenticalKeysAverageValues) {
  Rng r(2);
  auto q = random_tensor<double>({1, 5, 3}, r), v = random_tensor<double>({1, 5, 3}, r);
  std::vector<double> kd;
  for (int i = 0; i < 5; ++i) kd.insert(kd.end(), {0.3, -1.0, 2.0});
  auto out = dense_attention(q, TD::from({1, 5, 3}, kd), v);
  for (std::size_t i = 0; i < 5; ++i) {
    for (std::size_t c = 0; c < 3; ++c) {
      double mean = 0.0;
      for (std::size_t j = 0; j < 5; ++j) mean += v.at({0, j, c}) / 5.0;
      EXPECT_NEAR(out.at({0, i, c}), mean, 1e-12);
    }
  }
}

TEST(DenseAttention, MatchesBruteForceFormula) {
  Rng r(3);
  auto q = random_tensor<double>({2, 5, 4}, r), k = random_tensor<double>({2, 5, 4}, r),
       v = random_tensor<double>({2, 5, 4}, r);
  EXPECT_LT(max_abs_diff(dense_attention(q, k, v).data(), brute_attention(q, k, v)), 1e-12);
}

TEST(DenseAttention, PermutationCovariance) {
  Rng r(4);
  const std::vector<std::size_t> perm = {3, 0, 4, 1, 2};
  auto q = random_tensor<float>({1, 5, 4}, r), k = random_tensor<float>({1, 5, 4}, r),
       v = random_tensor<float>({1, 5, 4}, r);
  auto permute = [&](const TF& x) {
    std::vector<float> out(x.size());
    for (std::size_t i = 0; i < 5; ++i)
      for (std::size_t c = 0; c < 4; ++c) out[i * 4 + c] = x.data()[perm[i] * 4 + c];
    return TF::from({1, 5, 4}, out);
  };
  auto a = permute(dense_attention(q, k, v));
  auto b = dense_attention(permute(q), permute(k), permute(v));
  EXPECT_LT(max_abs_diff(a.data(), b.data()), 1e-6);
}

// ---- pattern masks -----------------------------------------------------

TEST(PatternMask, WideLocalWindowIsAllTrue) {
  auto c = config_for(AttentionKind::kLocal);
  c.window = 12;
  const auto m = build_pattern_mask(AttentionKind::kLocal, c, 6);
  for (auto a : m.allowed) EXPECT_EQ(a, 1);
}

TEST(PatternMask, UnitLocalWindowIsDiagonal) {
  auto c = config_for(AttentionKind::kLocal);
  c.window = 1;
  const auto m = build_pattern_mask(AttentionKind::kLocal, c, 4);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j) EXPECT_EQ(m.at(i, j), i == j);
}

TEST(PatternMask, ZeroWindowIsAnError) {
  auto c = config_for(AttentionKind::kLocal);
  c.window = 0;
  EXPECT_THROW(build_pattern_mask(AttentionKind::kLocal, c, 4), UsageError);
}

TEST(PatternMask, BigbirdRowsAreSetUnions) {
  AttentionConfig c = config_for(AttentionKind::kBigbird);
  c.window = 3;
  c.num_global = 1;
  c.num_random = 2;
  c.seed = 7;
  const std::size_t n = 8;
  const auto m = build_pattern_mask(AttentionKind::kBigbird, c, n);
  for (std::size_t i = 0; i < n; ++i) {
    std::set<std::size_t> keys;
    for (std::size_t j = 0; j < n; ++j) {
      const std::size_t dist = i > j ? i - j : j - i;
      if (dist <= c.window / 2 || i < c.num_global || j < c.num_global) keys.insert(j);
    }
    Rng rr = Rng(c.seed).split(i);
    for (std::size_t t = 0; t < c.num_random; ++t) keys.insert(rr.uniform_int(n));
    EXPECT_EQ(m.row_count(i), keys.size()) << "row " << i;
    for (std::size_t j : keys) EXPECT_TRUE(m.at(i, j));
  }
}

TEST(PatternMask, SparseAddsStridedKeys) {
  AttentionConfig c = config_for(AttentionKind::kSparse);
  c.window = 3;
  const auto m = build_pattern_mask(AttentionKind::kSparse, c, 10);
  for (std::size_t i = 0; i < 10; ++i)
    for (std::size_t j = 0; j < 10; ++j) {
      const std::size_t dist = i > j ? i - j : j - i;
      EXPECT_EQ(m.at(i, j), dist <= 1 || j % 3 == 0) << i << "," << j;
    }
}

TEST(PatternMask, LongformerGlobalRowsAndColumns) {
  AttentionConfig c = config_for(AttentionKind::kLongformer);
  c.window = 2;
  c.num_global = 2;
  const auto m = build_pattern_mask(AttentionKind::kLongformer, c, 7);
  for (std::size_t i = 0; i < 7; ++i)
    for (std::size_t j = 0; j < 7; ++j) {
      const std::size_t dist = i > j ? i - j : j - i;
      EXPECT_EQ(m.at(i, j), dist <= 1 || i < 2 || j < 2);
    }
}

TEST(PatternMask, EveryRowHasAnEntryAndIsDeterministic) {
  for (auto kind : {AttentionKind::kLocal, AttentionKind::kSparse, AttentionKind::kLongformer,
                    AttentionKind::kBigbird}) {
    auto c = config_for(kind);
    c.window = 2;
    const auto a = build_pattern_mask(kind, c, 9), b = build_pattern_mask(kind, c, 9);
    EXPECT_EQ(a.allowed, b.allowed);
    for (std::size_t i = 0; i < 9; ++i) EXPECT_GE(a.row_count(i), 1u);
  }
}

TEST(PatternAttention, AllTrueMaskIsDense) {
  Rng r(5);
  auto q = random_tensor<float>({2, 6, 4}, r), k = random_tensor<float>({2, 6, 4}, r),
       v = random_tensor<float>({2, 6, 4}, r);
  PatternMask all{6, std::vector<std::uint8_t>(36, 1)};
  EXPECT_LT(max_abs_diff(pattern_attention(q, k, v, all).data(), dense_attention(q, k, v).data()), 1e-6);
}

TEST(PatternAttention, IdentityMaskReturnsValues) {
  Rng r(6);
  auto q = random_tensor<float>({1, 5, 3}, r), k = random_tensor<float>({1, 5, 3}, r),
       v = random_tensor<float>({1, 5, 3}, r);
  PatternMask eye{5, std::vector<std::uint8_t>(25, 0)};
  for (std::size_t i = 0; i < 5; ++i) eye.allowed[i * 5 + i] = 1;
  EXPECT_EQ(max_abs_diff(pattern_attention(q, k, v, eye).data(), v.data()), 0.0);
}

TEST(PatternAttention, BandedMatchesMaskedOracle) {
  Rng r(7);
  auto q = random_tensor<double>({2, 6, 4}, r), k = random_tensor<double>({2, 6, 4}, r),
       v = random_tensor<double>({2, 6, 4}, r);
  auto c = config_for(AttentionKind::kLocal);
  c.window = 3;
  const auto m = build_pattern_mask(AttentionKind::kLocal, c, 6);
  auto oracle = brute_attention(q, k, v, [&](std::size_t, std::size_t i, std::size_t j) { return m.at(i, j); });
  EXPECT_LT(max_abs_diff(pattern_attention(q, k, v, m).data(), oracle), 1e-5);
}

// ---- kernel ----------------------------------------------------------------

TEST(KernelAttention, SingleKeyReturnsValues) {
  Rng r(8);
  for (auto kind : {AttentionKind::kLinear, AttentionKind::kPerformer}) {
    auto q = random_tensor<float>({3, 1, 4}, r), k = random_tensor<float>({3, 1, 4}, r),
         v = random_tensor<float>({3, 1, 4}, r);
    auto out = kernel_attention(q, k, v, kind, config_for(kind));
    EXPECT_LT(max_abs_diff(out.data(), v.data()), 1e-6) << kind_name(kind);
  }
}

TEST(KernelAttention, EqualKeysGiveEqualRows) {
  Rng r(9);
  auto q = random_tensor<float>({1, 6, 4}, r), v = random_tensor<float>({1, 6, 4}, r);
  auto k = TF::full({1, 6, 4}, 0.4f);
  auto out = kernel_attention(q, k, v, AttentionKind::kLinear, config_for(AttentionKind::kLinear));
  for (std::size_t i = 1; i < 6; ++i)
    for (std::size_t c = 0; c < 4; ++c) EXPECT_NEAR(out.at({0, i, c}), out.at({0, 0, c}), 1e-6);
}

TEST(KernelAttention, LinearMatchesFeatureFormula) {
  Rng r(10);
  auto q = random_tensor<double>({2, 5, 3}, r), k = random_tensor<double>({2, 5, 3}, r),
       v = random_tensor<double>({2, 5, 3}, r);
  auto phi = [](double x) { return x > 0 ? x + 1.0 : std::exp(x); };
  auto out = kernel_attention(q, k, v, AttentionKind::kLinear, config_for(AttentionKind::kLinear));
  for (std::size_t g = 0; g < 2; ++g)
    for (std::size_t i = 0; i < 5; ++i) {
      std::vector<double> num(3, 0.0);
      double den = 0.0;
      for (std::size_t j = 0; j < 5; ++j) {
        double w = 0.0;
        for (std::size_t c = 0; c < 3; ++c) w += phi(q.at({g, i, c})) * phi(k.at({g, j, c}));
        den += w;
        for (std::size_t c = 0; c < 3; ++c) num[c] += w * v.at({g, j, c});
      }
      for (std::size_t c = 0; c < 3; ++c) EXPECT_NEAR(out.at({g, i, c}), num[c] / den, 1e-12);
    }
}

TEST(KernelAttention, PerformerApproximatesDenseWithManyFeatures) {
  Rng r(11);
  auto q = random_tensor<double>({1, 6, 4}, r, 0.3), k = random_tensor<double>({1, 6, 4}, r, 0.3),
       v = random_tensor<double>({1, 6, 4}, r);
  auto c = config_for(AttentionKind::kPerformer);
  c.num_features = 4096;
  auto out = kernel_attention(q, k, v, AttentionKind::kPerformer, c);
  EXPECT_LT(max_abs_diff(out.data(), brute_attention(q, k, v)), 0.05);
}

// ---- Linformer -------------------------------------------------------------

TEST(LowrankAttention, IdentityProjectionIsDense) {
  Rng r(12);
  auto q = random_tensor<float>({2, 6, 4}, r), k = random_tensor<float>({2, 6, 4}, r),
       v = random_tensor<float>({2, 6, 4}, r);
  auto c = config_for(AttentionKind::kLinformer);
  c.proj_rank = 6;
  std::vector<float> eye(36, 0.0f);
  for (std::size_t i = 0; i < 6; ++i) eye[i * 6 + i] = 1.0f;
  auto out = lowrank_attention(q, k, v, TF::from({6, 6}, eye), c);
  EXPECT_LT(max_abs_diff(out.data(), dense_attention(q, k, v).data()), 1e-6);
}

TEST(LowrankAttention, RankOneCollapsesEqualQueries) {
  Rng r(13);
  auto q = TF::full({1, 5, 4}, 0.7f), k = random_tensor<float>({1, 5, 4}, r),
       v = random_tensor<float>({1, 5, 4}, r);
  auto c = config_for(AttentionKind::kLinformer);
  c.proj_rank = 1;
  auto out = lowrank_attention(q, k, v, random_tensor<float>({5, 1}, r), c);
  for (std::size_t i = 1; i < 5; ++i)
    for (std::size_t d = 0; d < 4; ++d) EXPECT_EQ(out.at({0, i, d}), out.at({0, 0, d}));
}

TEST(LowrankAttention, MatchesExplicitProjection) {
  Rng r(14);
  auto q = random_tensor<double>({2, 6, 4}, r), k = random_tensor<double>({2, 6, 4}, r),
       v = random_tensor<double>({2, 6, 4}, r), p = random_tensor<double>({8, 3}, r);
  auto c = config_for(AttentionKind::kLinformer);
  c.proj_rank = 3;
  auto project = [&](const TD& x) {
    std::vector<double> out(2 * 3 * 4, 0.0);
    for (std::size_t g = 0; g < 2; ++g)
      for (std::size_t rr = 0; rr < 3; ++rr)
        for (std::size_t d = 0; d < 4; ++d)
          for (std::size_t s = 0; s < 6; ++s) out[(g * 3 + rr) * 4 + d] += p.at({s, rr}) * x.at({g, s, d});
    return TD::from({2, 3, 4}, out);
  };
  auto oracle = brute_attention(q, project(k), project(v));
  EXPECT_LT(max_abs_diff(lowrank_attention(q, k, v, p, c).data(), oracle), 1e-5);
  c.proj_rank = 0;
  EXPECT_THROW(lowrank_attention(q, k, v, p, c), UsageError);
}

// ---- Synthesizer -------------------------------------------------------------

TEST(SyntheticAttention, ZeroRandomLogitsAverageValues) {
  Rng r(15);
  auto c = config_for(AttentionKind::kSynthesizer);
  c.synth_mode = SynthMode::kRandom;
  c.max_len = 5;
  SynthesizerWeights<float> w;
  w.logits = TF::zeros({1, 5, 5});
  auto x = random_tensor<float>({1, 5, 4}, r), v = random_tensor<float>({1, 5, 4}, r);
  auto out = synthetic_attention(x, v, w, 1, c);
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t d = 0; d < 4; ++d) {
      double mean = 0.0;
      for (std::size_t j = 0; j < 5; ++j) mean += v.at({0, j, d}) / 5.0;
      EXPECT_NEAR(out.at({0, i, d}), mean, 1e-6);
    }
}

TEST(SyntheticAttention, DenseModeSingleTokenReturnsValues) {
  Rng r(16);
  auto c = config_for(AttentionKind::kSynthesizer);
  c.max_len = 4;
  SynthesizerWeights<float> w;
  w.w1 = random_tensor<float>({3, 5}, r);
  w.b1 = random_tensor<float>({5}, r);
  w.w2 = random_tensor<float>({5, 2 * 4}, r);
  w.b2 = random_tensor<float>({2 * 4}, r);
  auto x = random_tensor<float>({1, 1, 3}, r), v = random_tensor<float>({2, 1, 4}, r);
  EXPECT_LT(max_abs_diff(synthetic_attention(x, v, w, 2, c).data(), v.data()), 1e-6);
}

TEST(SyntheticAttention, RandomModeMatchesSoftmaxFormula) {
  Rng r(17);
  auto c = config_for(AttentionKind::kSynthesizer);
  c.synth_mode = SynthMode::kRandom;
  c.max_len = 6;
  SynthesizerWeights<double> w;
  w.logits = random_tensor<double>({2, 6, 6}, r);
  auto x = random_tensor<double>({1, 4, 3}, r), v = random_tensor<double>({2, 4, 3}, r);
  auto out = synthetic_attention(x, v, w, 2, c);
  for (std::size_t h = 0; h < 2; ++h)
    for (std::size_t i = 0; i < 4; ++i) {
      double z = 0.0;
      for (std::size_t j = 0; j < 4; ++j) z += std::exp(w.logits.at({h, i, j}));
      for (std::size_t d = 0; d < 3; ++d) {
        double expect = 0.0;
        for (std::size_t j = 0; j < 4; ++j) expect += std::exp(w.logits.at({h, i, j})) / z * v.at({h, j, d});
        EXPECT_NEAR(out.at({h, i, d}), expect, 1e-12);
      }
    }
}

TEST(SyntheticAttention, LongerThanTrainedLengthIsAnError) {
  auto c = config_for(AttentionKind::kSynthesizer);
  c.synth_mode = SynthMode::kRandom;
  c.max_len = 3;
  SynthesizerWeights<float> w;
  w.logits = TF::zeros({1, 3, 3});
  EXPECT_THROW(synthetic_attention(TF::zeros({1, 4, 2}), TF::zeros({1, 4, 2}), w, 1, c), UsageError);
}

// ---- Reformer --------------------------------------------------------------

TEST(LshAttention, SingleBucketIsDense) {
  Rng r(18);
  auto q = random_tensor<float>({2, 8, 4}, r), k = random_tensor<float>({2, 8, 4}, r),
       v = random_tensor<float>({2, 8, 4}, r);
  auto c = config_for(AttentionKind::kReformer);
  c.num_hashes = 1;
  c.bucket_size = 8;
  ASSERT_EQ(lsh_num_buckets(c, 8), 1u);
  EXPECT_LT(max_abs_diff(lsh_attention(q, k, v, c).data(), dense_attention(q, k, v).data()), 1e-5);
}

TEST(LshAttention, SingleTokenReturnsValues) {
  Rng r(19);
  auto q = random_tensor<float>({2, 1, 4}, r), v = random_tensor<float>({2, 1, 4}, r);
  EXPECT_EQ(max_abs_diff(lsh_attention(q, q, v, config_for(AttentionKind::kReformer)).data(), v.data()), 0.0);
}

TEST(LshAttention, MatchesInducedBucketMask) {
  Rng r(20);
  auto q = random_tensor<double>({2, 8, 4}, r), k = random_tensor<double>({2, 8, 4}, r),
       v = random_tensor<double>({2, 8, 4}, r);
  auto c = config_for(AttentionKind::kReformer);
  c.num_hashes = 2;
  c.bucket_size = 2;
  const std::size_t nb = lsh_num_buckets(c, 8);
  ASSERT_EQ(nb, 4u);
  // Independent bucketing: argmax over hyperplane projections, lowest index on ties.
  auto bucket = [&](const TD& x, std::size_t g, std::size_t i, const std::vector<double>& planes) {
    std::size_t best = 0;
    double best_val = -1e300;
    for (std::size_t b = 0; b < nb; ++b) {
      double dot = 0.0;
      for (std::size_t d = 0; d < 4; ++d) dot += x.at({g, i, d}) * planes[d * nb + b];
      if (dot > best_val) {
        best = b;
        best_val = dot;
      }
    }
    return best;
  };
  std::vector<std::uint8_t> allowed(2 * 8 * 8, 0);
  for (std::size_t round = 0; round < 2; ++round) {
    const auto planes = lsh_hyperplanes<double>(c, 4, nb, round);
    for (std::size_t g = 0; g < 2; ++g)
      for (std::size_t i = 0; i < 8; ++i)
        for (std::size_t j = 0; j < 8; ++j)
          if (bucket(q, g, i, planes) == bucket(k, g, j, planes)) allowed[(g * 8 + i) * 8 + j] = 1;
  }
  for (std::size_t g = 0; g < 2; ++g)
    for (std::size_t i = 0; i < 8; ++i) allowed[(g * 8 + i) * 8 + i] = 1;
  auto oracle = brute_attention(q, k, v, [&](std::size_t g, std::size_t i, std::size_t j) {
    return allowed[(g * 8 + i) * 8 + j] != 0;
  });
  EXPECT_LT(max_abs_diff(lsh_attention(q, k, v, c).data(), oracle), 1e-5);
  EXPECT_EQ(lsh_bucket_mask(q, k, c).allowed, allowed);
}

// ---- cross-kind properties ------------------------------------------------

// Runs `kind` on (groups, seq, d) inputs with whatever fixed weights it needs.
TF run_kind(AttentionKind kind, const TF& q, const TF& k, const TF& v, std::span<const std::size_t> lengths,
            std::size_t max_len) {
  auto c = config_for(kind);
  c.window = 3;
  c.proj_rank = 4;
  c.bucket_size = 2;
  c.max_len = max_len;
  switch (kind) {
    case AttentionKind::kDense: return dense_attention(q, k, v, nullptr, lengths);
    case AttentionKind::kLocal:
    case AttentionKind::kSparse:
    case AttentionKind::kLongformer:
    case AttentionKind::kBigbird: {
      const auto m = build_pattern_mask(kind, c, q.dim(1));
      return pattern_attention(q, k, v, m, lengths);
    }
    case AttentionKind::kLinear:
    case AttentionKind::kPerformer: return kernel_attention(q, k, v, kind, c, lengths);
    case AttentionKind::kLinformer: {
      Rng r(99);
      return lowrank_attention(q, k, v, random_tensor<float>({max_len, 4}, r), c, lengths);
    }
    case AttentionKind::kReformer: return lsh_attention(q, k, v, c, lengths);
    case AttentionKind::kSynthesizer: {
      Rng r(98);
      c.synth_mode = SynthMode::kRandom;
      SynthesizerWeights<float> w;
      w.logits = random_tensor<float>({q.dim(0), max_len, max_len}, r);
      // Random mode ignores x; groups act as heads of one example.
      return synthetic_attention(TF::zeros({1, q.dim(1), 2}), v, w, q.dim(0), c, lengths);
    }
  }
  return {};
}

class EveryKind : public ::testing::TestWithParam<AttentionKind> {};

TEST_P(EveryKind, ShapePreservedAndDeterministic) {
  Rng r(21);
  auto q = random_tensor<float>({3, 7, 4}, r), k = random_tensor<float>({3, 7, 4}, r),
       v = random_tensor<float>({3, 7, 4}, r);
  auto a = run_kind(GetParam(), q, k, v, {}, 8), b = run_kind(GetParam(), q, k, v, {}, 8);
  EXPECT_EQ(a.shape(), v.shape());
  EXPECT_EQ(max_abs_diff(a.data(), b.data()), 0.0);
  for (float x : a.data()) EXPECT_TRUE(std::isfinite(x));
}

TEST_P(EveryKind, PaddedPositionsDoNotLeak) {
  const auto kind = GetParam();
  Rng r(22);
  const std::size_t groups = 2;
  auto q = random_tensor<float>({groups, 5, 4}, r), k = random_tensor<float>({groups, 5, 4}, r),
       v = random_tensor<float>({groups, 5, 4}, r);
  // Same valid prefix of length 3 followed by different garbage.
  auto garbled = [&](TF x) {
    auto y = x.clone();
    for (std::size_t g = 0; g < groups; ++g)
      for (std::size_t i = 3; i < 5; ++i)
        for (std::size_t c = 0; c < 4; ++c) y.mutable_data()[(g * 5 + i) * 4 + c] = 50.0f * static_cast<float>(r.normal());
    return y;
  };
  const std::vector<std::size_t> lengths(groups, 3);
  auto a = run_kind(kind, q, k, v, lengths, 8);
  auto b = run_kind(kind, garbled(q), garbled(k), garbled(v), lengths, 8);
  for (std::size_t g = 0; g < groups; ++g)
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t c = 0; c < 4; ++c)
        EXPECT_NEAR(a.at({g, i, c}), b.at({g, i, c}), 1e-5) << kind_name(kind) << " g" << g << " i" << i;
}

INSTANTIATE_TEST_SUITE_P(Attention, EveryKind,
                         ::testing::Values(AttentionKind::kBigbird, AttentionKind::kLinear,
                                           AttentionKind::kLinformer, AttentionKind::kLocal,
                                           AttentionKind::kLongformer, AttentionKind::kPerformer,
                                           AttentionKind::kReformer, AttentionKind::kSparse,
                                           AttentionKind::kSynthesizer, AttentionKind::kDense),
                         [](const auto& info) { return std::string(kind_name(info.param)); });

TEST(AttentionConfig, Validation) {
  auto c = config_for(AttentionKind::kLinformer);
  c.proj_rank = 9;
  EXPECT_THROW(c.validate(8), UsageError);
  c.max_len = 16;
  EXPECT_NO_THROW(c.validate(8));
  EXPECT_THROW(c.validate(17), UsageError);
  auto p = config_for(AttentionKind::kPerformer);
  p.num_features = 0;
  EXPECT_THROW(p.validate(4), UsageError);
  // Fields of other kinds are ignored.
  auto l = config_for(AttentionKind::kLocal);
  l.num_features = 0;
  l.proj_rank = 0;
  EXPECT_NO_THROW(l.validate(4));
}

TEST(AttentionKindNames, RoundTripAndAliases) {
  for (auto kind : kCandidateKinds) EXPECT_EQ(parse_kind(kind_name(kind)), kind);
  EXPECT_EQ(parse_kind("LinearTransformer"), AttentionKind::kLinear);
  EXPECT_EQ(parse_kind("sparsetransformer"), AttentionKind::kSparse);
  EXPECT_THROW(parse_kind("Nope"), UsageError);
  for (auto kind : kCandidateKinds) EXPECT_NE(kind, AttentionKind::kDense);
}

}  // namespace
}  // namespace hetnas
