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

#ifndef HETNAS_TRAIN_HPP_
#define HETNAS_TRAIN_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "hetnas/model.hpp"
#include "hetnas/optim.hpp"
#include "hetnas/tasks.hpp"

namespace hetnas {

struct TrainOptions {
  std::int64_t warmup = 100;
  double base_lr = 0.05;
  std::size_t batch_size = 32;
  std::int64_t eval_every = 100;  // validation period for train_with_validation
};

// Number of correct argmax predictions; dropout off, no graph recorded.
template <typename T>
std::size_t count_correct(const Model<T>& model, std::span<const Example> examples,
                          std::size_t batch_size = 64);

// Fraction of correctly classified examples. Throws on an empty set.
template <typename T>
double validation_accuracy(const Model<T>& model, std::span<const Example> examples,
                           std::size_t batch_size = 64);

// Minibatch Adam on the model's trainable parameters. Batches come from
// reshuffled passes over the training set; the step counter and the learning
// rate schedule continue across calls to `run`.
template <typename T>
class Trainer {
 public:
  Trainer(Model<T>& model, std::span<const Example> train, const TrainOptions& options,
          std::uint64_t seed);

  // One optimizer step; returns the batch loss. Throws RuntimeError when the
  // loss is not finite.
  double step();
  // `steps` optimizer steps; returns the mean loss (0 when steps == 0).
  double run(std::int64_t steps);

  std::int64_t steps_done() const { return state_.step; }

 private:
  const TokenBatch& next_batch();

  Model<T>& model_;
  std::span<const Example> train_;
  TrainOptions options_;
  LrSchedule schedule_;
  AdamState<T> state_;
  Rng shuffle_rng_;
  std::vector<TokenBatch> epoch_;
  std::size_t cursor_ = 0;
};

struct CurvePoint {
  std::int64_t step = 0;
  double loss = 0.0;
  double val_acc = 0.0;
};

struct TrainResult {
  double best_val_acc = 0.0;
  std::int64_t best_step = 0;
  std::vector<CurvePoint> curve;
};

// Trains for `steps`, validating every options.eval_every steps and at the
// end (and once before training). The model is left holding the parameters
// of the best validation point; ties keep the earlier point.
template <typename T>
TrainResult train_with_validation(Model<T>& model, std::span<const Example> train,
                                  std::span<const Example> val, std::int64_t steps,
                                  const TrainOptions& options, std::uint64_t seed);

}  // namespace hetnas

#endif  // HETNAS_TRAIN_HPP_
