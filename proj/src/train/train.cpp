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

#include "hetnas/train.hpp"

#include <algorithm>
#include <cmath>

#include "hetnas/error.hpp"

namespace hetnas {

template <typename T>
std::size_t count_correct(const Model<T>& model, std::span<const Example> examples,
                          std::size_t batch_size) {
  NoGradGuard no_grad;
  std::size_t correct = 0;
  const std::size_t classes = model.config().num_classes;
  for (const auto& batch : make_batches(examples, batch_size)) {
    const auto logits = model.forward_eval(batch);
    const auto v = logits.data();
    for (std::size_t r = 0; r < batch.rows; ++r) {
      const auto row = v.subspan(r * classes, classes);
      const auto pred = std::max_element(row.begin(), row.end()) - row.begin();
      if (pred == batch.labels[r]) ++correct;
    }
  }
  return correct;
}

template <typename T>
double validation_accuracy(const Model<T>& model, std::span<const Example> examples,
                           std::size_t batch_size) {
  if (examples.empty()) throw UsageError("validation_accuracy: empty validation set");
  return static_cast<double>(count_correct(model, examples, batch_size)) /
         static_cast<double>(examples.size());
}

template <typename T>
Trainer<T>::Trainer(Model<T>& model, std::span<const Example> train, const TrainOptions& options,
                    std::uint64_t seed)
    : model_(model),
      train_(train),
      options_(options),
      schedule_{options.base_lr, options.warmup},
      shuffle_rng_(Rng(seed).split(0x5348)) {
  if (train.empty()) throw UsageError("trainer: empty training set");
  if (options.batch_size == 0) throw UsageError("trainer: batch_size must be >= 1");
  if (options.warmup < 1) throw UsageError("trainer: warmup must be >= 1");
  if (!(options.base_lr > 0.0)) throw UsageError("trainer: base_lr must be positive");
}

template <typename T>
const TokenBatch& Trainer<T>::next_batch() {
  if (cursor_ >= epoch_.size()) {
    epoch_ = make_batches(train_, options_.batch_size, kPadId, &shuffle_rng_);
    cursor_ = 0;
  }
  return epoch_[cursor_++];
}

template <typename T>
double Trainer<T>::step() {
  const auto& batch = next_batch();
  model_.zero_grad();
  auto loss = cross_entropy(model_.forward(batch, true), batch.labels);
  const double value = static_cast<double>(loss.item());
  if (!std::isfinite(value)) {
    throw RuntimeError("training diverged: non-finite loss at step " + std::to_string(state_.step + 1));
  }
  loss.backward();
  auto params = model_.trainable_parameters(true);
  adam_step<T>(params, state_, schedule_.at(state_.step + 1));
  return value;
}

template <typename T>
double Trainer<T>::run(std::int64_t steps) {
  if (steps < 0) throw UsageError("trainer: negative step count");
  double total = 0.0;
  for (std::int64_t i = 0; i < steps; ++i) total += step();
  return steps > 0 ? total / static_cast<double>(steps) : 0.0;
}

template <typename T>
TrainResult train_with_validation(Model<T>& model, std::span<const Example> train,
                                  std::span<const Example> val, std::int64_t steps,
                                  const TrainOptions& options, std::uint64_t seed) {
  if (options.eval_every < 1) throw UsageError("train: eval_every must be >= 1");
  Trainer<T> trainer(model, train, options, seed);
  auto params = model.parameters();
  std::vector<std::vector<T>> best;
  auto snapshot = [&] {
    best.clear();
    for (const auto& p : params) best.emplace_back(p.tensor.data().begin(), p.tensor.data().end());
  };

  TrainResult result;
  result.best_val_acc = validation_accuracy(model, val);
  result.curve.push_back({0, 0.0, result.best_val_acc});
  snapshot();
  std::int64_t done = 0;
  while (done < steps) {
    const std::int64_t chunk = std::min(options.eval_every, steps - done);
    const double loss = trainer.run(chunk);
    done += chunk;
    const double acc = validation_accuracy(model, val);
    result.curve.push_back({done, loss, acc});
    if (acc > result.best_val_acc) {
      result.best_val_acc = acc;
      result.best_step = done;
      snapshot();
    }
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto dst = params[i].tensor.mutable_data();
    std::copy(best[i].begin(), best[i].end(), dst.begin());
  }
  return result;
}

#define HETNAS_INSTANTIATE_TRAIN(T)                                                              \
  template std::size_t count_correct<T>(const Model<T>&, std::span<const Example>, std::size_t); \
  template double validation_accuracy<T>(const Model<T>&, std::span<const Example>, std::size_t); \
  template class Trainer<T>;                                                                     \
  template TrainResult train_with_validation<T>(Model<T>&, std::span<const Example>,             \
                                                std::span<const Example>, std::int64_t,          \
                                                const TrainOptions&, std::uint64_t);

HETNAS_INSTANTIATE_TRAIN(float)
HETNAS_INSTANTIATE_TRAIN(double)

}  // namespace hetnas
