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

#ifndef HETNAS_OPTIM_HPP_
#define HETNAS_OPTIM_HPP_

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "hetnas/tensor.hpp"

namespace hetnas {

// Linear warm-up followed by inverse square-root decay:
//   lr(t) = base_lr * min(t / warmup, 1) / sqrt(max(t, warmup))
// Peaks at base_lr / sqrt(warmup) when t == warmup.
struct LrSchedule {
  double base_lr = 0.05;
  std::int64_t warmup_steps = 100;

  double at(std::int64_t t) const;
};

double lr_at(const LrSchedule& schedule, std::int64_t t);

// Per-parameter Adam moments.
template <typename T>
struct AdamSlot {
  std::vector<T> m;
  std::vector<T> v;
};

template <typename T>
struct AdamState {
  std::int64_t step = 0;
  double beta1 = 0.9;
  double beta2 = 0.98;
  double epsilon = 1e-9;
  // Keyed by parameter node; a parameter left out of a step keeps its moments.
  std::map<const void*, AdamSlot<T>> slots;
};

// One bias-corrected Adam update of `params` using `grads` (same order and
// shapes). Parameters not listed are untouched. Increments state.step.
template <typename T>
void adam_step(std::span<Tensor<T>> params, std::span<const std::vector<T>> grads,
               AdamState<T>& state, double lr);

// Convenience overload reading each parameter's accumulated grad.
template <typename T>
void adam_step(std::span<Tensor<T>> params, AdamState<T>& state, double lr);

}  // namespace hetnas

#endif  // HETNAS_OPTIM_HPP_
