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

#include "hetnas/optim.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "hetnas/error.hpp"

namespace hetnas {

double LrSchedule::at(std::int64_t t) const {
  if (t < 1) throw UsageError("lr_at: step must be >= 1, got " + std::to_string(t));
  if (base_lr <= 0.0) throw UsageError("lr_at: base_lr must be positive");
  if (warmup_steps < 1) throw UsageError("lr_at: warmup_steps must be >= 1");
  const double td = static_cast<double>(t);
  const double w = static_cast<double>(warmup_steps);
  return base_lr * std::min(td / w, 1.0) / std::sqrt(std::max(td, w));
}

double lr_at(const LrSchedule& schedule, std::int64_t t) { return schedule.at(t); }

template <typename T>
void adam_step(std::span<Tensor<T>> params, std::span<const std::vector<T>> grads,
               AdamState<T>& state, double lr) {
  if (params.size() != grads.size()) throw UsageError("adam_step: params/grads count mismatch");
  if (!(lr > 0.0)) throw UsageError("adam_step: learning rate must be positive");
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (grads[i].size() != params[i].size()) {
      throw UsageError("adam_step: gradient " + std::to_string(i) + " has " +
                       std::to_string(grads[i].size()) + " values for a parameter of shape " +
                       shape_str(params[i].shape()));
    }
    for (T g : grads[i]) {
      if (!std::isfinite(g)) throw RuntimeError("adam_step: non-finite gradient");
    }
  }

  ++state.step;
  const double b1 = state.beta1, b2 = state.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& slot = state.slots[params[i].node().get()];
    const std::size_t n = params[i].size();
    if (slot.m.size() != n) {
      slot.m.assign(n, T(0));
      slot.v.assign(n, T(0));
    }
    auto w = params[i].mutable_data();
    const auto& g = grads[i];
    for (std::size_t j = 0; j < n; ++j) {
      slot.m[j] = static_cast<T>(b1 * slot.m[j] + (1.0 - b1) * g[j]);
      slot.v[j] = static_cast<T>(b2 * slot.v[j] + (1.0 - b2) * g[j] * g[j]);
      const double m_hat = slot.m[j] / c1;
      const double v_hat = slot.v[j] / c2;
      w[j] = static_cast<T>(w[j] - lr * m_hat / (std::sqrt(v_hat) + state.epsilon));
    }
  }
}

template <typename T>
void adam_step(std::span<Tensor<T>> params, AdamState<T>& state, double lr) {
  std::vector<std::vector<T>> grads;
  grads.reserve(params.size());
  for (const auto& p : params) {
    auto g = p.grad();
    grads.emplace_back(g.begin(), g.end());
  }
  adam_step<T>(params, std::span<const std::vector<T>>(grads), state, lr);
}

template void adam_step<float>(std::span<Tensor<float>>, std::span<const std::vector<float>>,
                               AdamState<float>&, double);
template void adam_step<double>(std::span<Tensor<double>>, std::span<const std::vector<double>>,
                                AdamState<double>&, double);
template void adam_step<float>(std::span<Tensor<float>>, AdamState<float>&, double);
template void adam_step<double>(std::span<Tensor<double>>, AdamState<double>&, double);

}  // namespace hetnas
