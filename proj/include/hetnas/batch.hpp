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

#ifndef HETNAS_BATCH_HPP_
#define HETNAS_BATCH_HPP_

#include <cstddef>
#include <cstdint>
#include <vector>

namespace hetnas {

// Reserved token ids shared by every task vocabulary.
inline constexpr std::int32_t kPadId = 0;
inline constexpr std::int32_t kClsId = 1;
inline constexpr std::int32_t kSepId = 2;
inline constexpr std::int32_t kFirstTaskToken = 3;

// Right-padded token matrix (rows x width), without the CLS token.
struct TokenBatch {
  std::size_t rows = 0;
  std::size_t width = 0;
  std::vector<std::int32_t> tokens;   // rows * width
  std::vector<std::size_t> lengths;   // unpadded length per row
  std::vector<std::int32_t> labels;   // empty for unlabeled batches
};

}  // namespace hetnas

#endif  // HETNAS_BATCH_HPP_
