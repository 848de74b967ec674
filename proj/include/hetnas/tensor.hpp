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

// Dense row-major tensors with tape-free reverse-mode differentiation.
//
// Every Tensor is a shared handle onto a graph node. Operations whose inputs
// require gradients record a closure on the result; `backward` walks the
// recorded graph in reverse topological order. Copying a Tensor aliases the
// node, like a PyTorch tensor.
//
// The library is instantiated for float (training) and double (gradient
// verification against finite differences).

#ifndef HETNAS_TENSOR_HPP_
#define HETNAS_TENSOR_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "hetnas/rng.hpp"

namespace hetnas {

using Shape = std::vector<std::size_t>;

std::size_t numel(const Shape& shape);
std::string shape_str(const Shape& shape);

namespace detail {

template <typename T>
struct Node {
  Shape shape;
  std::vector<T> data;
  std::vector<T> grad;  // empty until something accumulates into it
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  // Reads `self.grad` and accumulates into the parents' grads.
  std::function<void(Node& self)> backward_fn;

  std::vector<T>& grad_buffer() {
    if (grad.empty()) grad.assign(data.size(), T(0));
    return grad;
  }
  bool is_leaf() const { return parents.empty(); }
};

}  // namespace detail

// Disables graph recording on the current thread while alive.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

bool grad_enabled();

template <typename T>
class Tensor {
 public:
  using value_type = T;
  using NodePtr = std::shared_ptr<detail::Node<T>>;

  Tensor() = default;

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, T value, bool requires_grad = false);
  static Tensor from(Shape shape, std::vector<T> values, bool requires_grad = false);
  static Tensor scalar(T value, bool requires_grad = false);

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const;
  std::size_t dim(std::size_t i) const;
  std::size_t rank() const { return shape().size(); }
  std::size_t size() const;

  std::span<const T> data() const;
  // Direct writes bypass the graph; only valid on leaves (parameters, inputs).
  std::span<T> mutable_data();
  T item() const;
  T at(std::initializer_list<std::size_t> index) const;

  bool requires_grad() const;
  void set_requires_grad(bool value);
  bool has_grad() const;
  // Zero-filled span of size() when no gradient has accumulated yet.
  std::span<const T> grad() const;
  void zero_grad();

  // Reverse-mode pass from a scalar. Leaf grads accumulate across calls.
  void backward() const;

  // Fresh leaf with the same values and no history.
  Tensor detach() const;
  Tensor clone() const;

  const NodePtr& node() const { return node_; }
  explicit Tensor(NodePtr node) : node_(std::move(node)) {}

 private:
  NodePtr node_;
};

// Boolean attention mask of shape (groups, rows, cols); `groups` may be 1 to
// broadcast over every group.
struct AttentionMask {
  std::size_t groups = 0;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::uint8_t> allowed;

  bool at(std::size_t g, std::size_t i, std::size_t j) const {
    const std::size_t gg = groups == 1 ? 0 : g;
    return allowed[(gg * rows + i) * cols + j] != 0;
  }
};

// ---- elementwise -------------------------------------------------------

template <typename T> Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b);
template <typename T> Tensor<T> sub(const Tensor<T>& a, const Tensor<T>& b);
template <typename T> Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b);
// `b` is tiled over `a`: b.size() must divide a.size() and match its trailing
// elements (bias over rows, positional table over a batch).
template <typename T> Tensor<T> add_tiled(const Tensor<T>& a, const Tensor<T>& b);
template <typename T> Tensor<T> scale(const Tensor<T>& a, T factor);
template <typename T> Tensor<T> relu(const Tensor<T>& a);
template <typename T> Tensor<T> exp(const Tensor<T>& a);
// elu(x) + 1, strictly positive.
template <typename T> Tensor<T> elu_plus_one(const Tensor<T>& a);
template <typename T> Tensor<T> sum(const Tensor<T>& a);
// Elementwise arithmetic mean of equally shaped tensors.
template <typename T> Tensor<T> mean_of(std::span<const Tensor<T>> parts);
template <typename T> Tensor<T> reshape(const Tensor<T>& a, Shape shape);

// ---- row-structured (last axis is the row) -------------------------------

// Sum over the last axis: (..., n) -> (...).
template <typename T> Tensor<T> row_sum(const Tensor<T>& a);
// x (..., n) minus r (...) broadcast along the last axis.
template <typename T> Tensor<T> sub_rows(const Tensor<T>& x, const Tensor<T>& r);
// x (..., n) divided by r (...) broadcast along the last axis.
template <typename T> Tensor<T> div_rows(const Tensor<T>& x, const Tensor<T>& r);
// Softmax along the last axis of a rank-3 tensor (groups, rows, cols).
// Masked entries are exactly zero; a row with no allowed entry throws
// RuntimeError("degenerate attention row").
template <typename T>
Tensor<T> masked_softmax(const Tensor<T>& x, const AttentionMask* mask);
template <typename T>
Tensor<T> layer_norm(const Tensor<T>& x, const Tensor<T>& gain, const Tensor<T>& bias,
                     T eps = T(1e-5));

// ---- linear algebra -------------------------------------------------------

// x (..., k) @ w (k, n) [+ b (n)] -> (..., n). `b` may be undefined.
template <typename T>
Tensor<T> linear(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b = {});
// Batched (g, m, k) @ (g, k, n) with optional transposes of either operand's
// trailing two axes.
template <typename T>
Tensor<T> bmm(const Tensor<T>& a, const Tensor<T>& b, bool transpose_a = false,
              bool transpose_b = false);
// out[g] = P[:s]^T x[g] for x (g, s, d) and P (s_max, r) -> (g, r, d).
template <typename T>
Tensor<T> project_sequence(const Tensor<T>& x, const Tensor<T>& projection);

// ---- layout ---------------------------------------------------------------

// (b, s, h*a) -> (b*h, s, a)
template <typename T> Tensor<T> split_heads(const Tensor<T>& x, std::size_t heads);
// (b*h, s, a) -> (b, s, h*a)
template <typename T> Tensor<T> merge_heads(const Tensor<T>& x, std::size_t heads);
// First `n` rows of a rank-2 table.
template <typename T> Tensor<T> take_rows(const Tensor<T>& table, std::size_t n);
// (b, s, e) -> (b, e) at sequence position `pos`.
template <typename T> Tensor<T> select_position(const Tensor<T>& x, std::size_t pos);
// Zeroes rows j >= lengths[g] of x (g, s, d).
template <typename T>
Tensor<T> mask_rows(const Tensor<T>& x, std::span<const std::size_t> lengths);
// (b, s, h*n_max) -> (b*h, s, n): per-head column block, first n columns.
template <typename T>
Tensor<T> slice_head_columns(const Tensor<T>& x, std::size_t heads, std::size_t n);
// (h, n_max, n_max) -> (b*h, n, n): top-left block of each head, tiled over b.
template <typename T>
Tensor<T> tile_head_blocks(const Tensor<T>& x, std::size_t batch, std::size_t n);

// ---- model-level ----------------------------------------------------------

// table (v, e) gathered at `ids` -> (ids.size(), e); reshape afterwards.
template <typename T>
Tensor<T> embedding(const Tensor<T>& table, std::span<const std::int32_t> ids);
// Mean softmax cross-entropy of logits (b, c) against integer labels.
template <typename T>
Tensor<T> cross_entropy(const Tensor<T>& logits, std::span<const std::int32_t> labels);
// Inverted dropout; identity when p == 0.
template <typename T> Tensor<T> dropout(const Tensor<T>& x, double p, Rng& rng);

}  // namespace hetnas

#endif  // HETNAS_TENSOR_HPP_
