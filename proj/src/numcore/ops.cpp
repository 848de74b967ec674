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

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include "hetnas/error.hpp"
#include "hetnas/tensor.hpp"

namespace hetnas {

namespace {

template <typename T>
using Node = detail::Node<T>;
template <typename T>
using NodePtr = std::shared_ptr<Node<T>>;
template <typename T>
using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MapM = Eigen::Map<Mat<T>>;
template <typename T>
using CMapM = Eigen::Map<const Mat<T>>;

// Builds an op result; attaches history only when recording and some input
// needs a gradient.
template <typename T>
Tensor<T> make_result(Shape shape, std::vector<T> data,
                      std::initializer_list<const Tensor<T>*> inputs,
                      std::function<void(Node<T>&)> backward_fn) {
  auto node = std::make_shared<Node<T>>();
  node->shape = std::move(shape);
  node->data = std::move(data);
  if (grad_enabled()) {
    bool any = false;
    for (const Tensor<T>* in : inputs) any = any || in->requires_grad();
    if (any) {
      node->requires_grad = true;
      for (const Tensor<T>* in : inputs) node->parents.push_back(in->node());
      node->backward_fn = std::move(backward_fn);
    }
  }
  return Tensor<T>(std::move(node));
}

template <typename T>
bool wants_grad(const Node<T>& self, std::size_t i) {
  return self.parents[i]->requires_grad;
}

template <typename T>
std::vector<T>& pgrad(Node<T>& self, std::size_t i) {
  return self.parents[i]->grad_buffer();
}

template <typename T>
const std::vector<T>& pdata(const Node<T>& self, std::size_t i) {
  return self.parents[i]->data;
}

template <typename T>
void require_same_shape(const Tensor<T>& a, const Tensor<T>& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw UsageError(std::string(op) + ": shape mismatch " + shape_str(a.shape()) + " vs " +
                     shape_str(b.shape()));
  }
}

template <typename T>
Shape drop_last(const Shape& s) {
  Shape out(s.begin(), s.end() - 1);
  if (out.empty()) out.push_back(1);
  return out;
}

template <typename T, typename F, typename G>
Tensor<T> unary(const Tensor<T>& a, F forward, G derivative) {
  const auto& x = a.data();
  std::vector<T> y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = forward(x[i]);
  return make_result<T>(a.shape(), std::move(y), {&a}, [derivative](Node<T>& self) {
    auto& gx = pgrad(self, 0);
    const auto& x = pdata(self, 0);
    for (std::size_t i = 0; i < x.size(); ++i) gx[i] += self.grad[i] * derivative(x[i], self.data[i]);
  });
}

}  // namespace

template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b) {
  require_same_shape(a, b, "add");
  const auto& x = a.data();
  const auto& y = b.data();
  std::vector<T> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] + y[i];
  return make_result<T>(a.shape(), std::move(out), {&a, &b}, [](Node<T>& self) {
    for (std::size_t p = 0; p < 2; ++p) {
      if (!wants_grad(self, p)) continue;
      auto& g = pgrad(self, p);
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
    }
  });
}

template <typename T>
Tensor<T> sub(const Tensor<T>& a, const Tensor<T>& b) {
  require_same_shape(a, b, "sub");
  const auto& x = a.data();
  const auto& y = b.data();
  std::vector<T> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] - y[i];
  return make_result<T>(a.shape(), std::move(out), {&a, &b}, [](Node<T>& self) {
    if (wants_grad(self, 0)) {
      auto& g = pgrad(self, 0);
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
    }
    if (wants_grad(self, 1)) {
      auto& g = pgrad(self, 1);
      for (std::size_t i = 0; i < g.size(); ++i) g[i] -= self.grad[i];
    }
  });
}

template <typename T>
Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b) {
  require_same_shape(a, b, "mul");
  const auto& x = a.data();
  const auto& y = b.data();
  std::vector<T> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] * y[i];
  return make_result<T>(a.shape(), std::move(out), {&a, &b}, [](Node<T>& self) {
    const auto& x = pdata(self, 0);
    const auto& y = pdata(self, 1);
    if (wants_grad(self, 0)) {
      auto& g = pgrad(self, 0);
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * y[i];
    }
    if (wants_grad(self, 1)) {
      auto& g = pgrad(self, 1);
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * x[i];
    }
  });
}

template <typename T>
Tensor<T> add_tiled(const Tensor<T>& a, const Tensor<T>& b) {
  const std::size_t n = a.size();
  const std::size_t m = b.size();
  if (m == 0 || n % m != 0) {
    throw UsageError("add_tiled: " + shape_str(b.shape()) + " does not tile " + shape_str(a.shape()));
  }
  const auto& x = a.data();
  const auto& y = b.data();
  std::vector<T> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = x[i] + y[i % m];
  return make_result<T>(a.shape(), std::move(out), {&a, &b}, [m](Node<T>& self) {
    if (wants_grad(self, 0)) {
      auto& g = pgrad(self, 0);
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
    }
    if (wants_grad(self, 1)) {
      auto& g = pgrad(self, 1);
      for (std::size_t i = 0; i < self.grad.size(); ++i) g[i % m] += self.grad[i];
    }
  });
}

template <typename T>
Tensor<T> scale(const Tensor<T>& a, T factor) {
  return unary(a, [factor](T x) { return x * factor; }, [factor](T, T) { return factor; });
}

template <typename T>
Tensor<T> relu(const Tensor<T>& a) {
  return unary(a, [](T x) { return x > T(0) ? x : T(0); },
               [](T x, T) { return x > T(0) ? T(1) : T(0); });
}

template <typename T>
Tensor<T> exp(const Tensor<T>& a) {
  return unary(a, [](T x) { return std::exp(x); }, [](T, T y) { return y; });
}

template <typename T>
Tensor<T> elu_plus_one(const Tensor<T>& a) {
  return unary(a, [](T x) { return x > T(0) ? x + T(1) : std::exp(x); },
               [](T x, T y) { return x > T(0) ? T(1) : y; });
}

template <typename T>
Tensor<T> sum(const Tensor<T>& a) {
  T total = T(0);
  for (T v : a.data()) total += v;
  return make_result<T>({1}, {total}, {&a}, [](Node<T>& self) {
    auto& g = pgrad(self, 0);
    for (auto& v : g) v += self.grad[0];
  });
}

template <typename T>
Tensor<T> mean_of(std::span<const Tensor<T>> parts) {
  if (parts.empty()) throw UsageError("mean_of: no tensors");
  if (parts.size() == 1) return parts[0];
  const std::size_t n = parts[0].size();
  for (const auto& p : parts) require_same_shape(parts[0], p, "mean_of");
  const T inv = T(1) / static_cast<T>(parts.size());
  std::vector<T> out(n, T(0));
  for (const auto& p : parts) {
    const auto& x = p.data();
    for (std::size_t i = 0; i < n; ++i) out[i] += x[i];
  }
  for (auto& v : out) v *= inv;

  auto node = std::make_shared<Node<T>>();
  node->shape = parts[0].shape();
  node->data = std::move(out);
  bool any = false;
  for (const auto& p : parts) any = any || p.requires_grad();
  if (grad_enabled() && any) {
    node->requires_grad = true;
    for (const auto& p : parts) node->parents.push_back(p.node());
    node->backward_fn = [inv](Node<T>& self) {
      for (std::size_t p = 0; p < self.parents.size(); ++p) {
        if (!wants_grad(self, p)) continue;
        auto& g = pgrad(self, p);
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * inv;
      }
    };
  }
  return Tensor<T>(std::move(node));
}

template <typename T>
Tensor<T> reshape(const Tensor<T>& a, Shape shape) {
  if (numel(shape) != a.size()) {
    throw UsageError("reshape: " + shape_str(a.shape()) + " -> " + shape_str(shape));
  }
  std::vector<T> out(a.data().begin(), a.data().end());
  return make_result<T>(std::move(shape), std::move(out), {&a}, [](Node<T>& self) {
    auto& g = pgrad(self, 0);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
  });
}

template <typename T>
Tensor<T> row_sum(const Tensor<T>& a) {
  const std::size_t n = a.shape().back();
  const std::size_t rows = a.size() / n;
  const auto& x = a.data();
  std::vector<T> out(rows, T(0));
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t j = 0; j < n; ++j) out[r] += x[r * n + j];
  }
  return make_result<T>(drop_last<T>(a.shape()), std::move(out), {&a}, [n](Node<T>& self) {
    auto& g = pgrad(self, 0);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i / n];
  });
}

namespace {

template <typename T>
void require_row_operand(const Tensor<T>& x, const Tensor<T>& r, const char* op) {
  if (x.rank() < 1 || r.size() * x.shape().back() != x.size()) {
    throw UsageError(std::string(op) + ": " + shape_str(r.shape()) + " is not a row vector for " +
                     shape_str(x.shape()));
  }
}

}  // namespace

template <typename T>
Tensor<T> sub_rows(const Tensor<T>& x, const Tensor<T>& r) {
  require_row_operand(x, r, "sub_rows");
  const std::size_t n = x.shape().back();
  const auto& xv = x.data();
  const auto& rv = r.data();
  std::vector<T> out(xv.size());
  for (std::size_t i = 0; i < xv.size(); ++i) out[i] = xv[i] - rv[i / n];
  return make_result<T>(x.shape(), std::move(out), {&x, &r}, [n](Node<T>& self) {
    if (wants_grad(self, 0)) {
      auto& g = pgrad(self, 0);
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
    }
    if (wants_grad(self, 1)) {
      auto& g = pgrad(self, 1);
      for (std::size_t i = 0; i < self.grad.size(); ++i) g[i / n] -= self.grad[i];
    }
  });
}

template <typename T>
Tensor<T> div_rows(const Tensor<T>& x, const Tensor<T>& r) {
  require_row_operand(x, r, "div_rows");
  const std::size_t n = x.shape().back();
  const auto& xv = x.data();
  const auto& rv = r.data();
  std::vector<T> out(xv.size());
  for (std::size_t i = 0; i < xv.size(); ++i) out[i] = xv[i] / rv[i / n];
  return make_result<T>(x.shape(), std::move(out), {&x, &r}, [n](Node<T>& self) {
    const auto& rv = pdata(self, 1);
    if (wants_grad(self, 0)) {
      auto& g = pgrad(self, 0);
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] / rv[i / n];
    }
    if (wants_grad(self, 1)) {
      // d(x/r)/dr = -x/r^2 = -y/r
      auto& g = pgrad(self, 1);
      for (std::size_t i = 0; i < self.grad.size(); ++i) {
        g[i / n] -= self.grad[i] * self.data[i] / rv[i / n];
      }
    }
  });
}

template <typename T>
Tensor<T> masked_softmax(const Tensor<T>& x, const AttentionMask* mask) {
  if (x.rank() != 3) throw UsageError("masked_softmax expects (groups, rows, cols), got " + shape_str(x.shape()));
  const std::size_t groups = x.dim(0), rows = x.dim(1), cols = x.dim(2);
  if (mask) {
    if (mask->rows != rows || mask->cols != cols || (mask->groups != 1 && mask->groups != groups)) {
      throw UsageError("masked_softmax: mask does not match " + shape_str(x.shape()));
    }
  }
  const auto& xv = x.data();
  std::vector<T> out(xv.size(), T(0));
  for (std::size_t g = 0; g < groups; ++g) {
    for (std::size_t i = 0; i < rows; ++i) {
      const std::size_t base = (g * rows + i) * cols;
      T row_max = -std::numeric_limits<T>::infinity();
      bool any = false;
      for (std::size_t j = 0; j < cols; ++j) {
        if (mask && !mask->at(g, i, j)) continue;
        any = true;
        row_max = std::max(row_max, xv[base + j]);
      }
      if (!any) throw RuntimeError("degenerate attention row");
      T total = T(0);
      for (std::size_t j = 0; j < cols; ++j) {
        if (mask && !mask->at(g, i, j)) continue;
        const T e = std::exp(xv[base + j] - row_max);
        out[base + j] = e;
        total += e;
      }
      const T inv = T(1) / total;
      for (std::size_t j = 0; j < cols; ++j) out[base + j] *= inv;
    }
  }
  return make_result<T>(x.shape(), std::move(out), {&x}, [cols](Node<T>& self) {
    auto& g = pgrad(self, 0);
    const std::size_t total_rows = self.data.size() / cols;
    for (std::size_t r = 0; r < total_rows; ++r) {
      const std::size_t base = r * cols;
      T dot = T(0);
      for (std::size_t j = 0; j < cols; ++j) dot += self.grad[base + j] * self.data[base + j];
      for (std::size_t j = 0; j < cols; ++j) {
        g[base + j] += self.data[base + j] * (self.grad[base + j] - dot);
      }
    }
  });
}

template <typename T>
Tensor<T> layer_norm(const Tensor<T>& x, const Tensor<T>& gain, const Tensor<T>& bias, T eps) {
  const std::size_t d = x.shape().back();
  if (gain.size() != d || bias.size() != d) throw UsageError("layer_norm: gain/bias size mismatch");
  const std::size_t rows = x.size() / d;
  const auto& xv = x.data();
  const auto& gv = gain.data();
  const auto& bv = bias.data();
  std::vector<T> out(xv.size());
  // Saved normalized inputs and inverse std per row.
  auto xhat = std::make_shared<std::vector<T>>(xv.size());
  auto rstd = std::make_shared<std::vector<T>>(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    const T* row = xv.data() + r * d;
    T mean = T(0);
    for (std::size_t j = 0; j < d; ++j) mean += row[j];
    mean /= static_cast<T>(d);
    T var = T(0);
    for (std::size_t j = 0; j < d; ++j) var += (row[j] - mean) * (row[j] - mean);
    var /= static_cast<T>(d);
    const T inv = T(1) / std::sqrt(var + eps);
    (*rstd)[r] = inv;
    for (std::size_t j = 0; j < d; ++j) {
      const T h = (row[j] - mean) * inv;
      (*xhat)[r * d + j] = h;
      out[r * d + j] = h * gv[j] + bv[j];
    }
  }
  return make_result<T>(x.shape(), std::move(out), {&x, &gain, &bias},
                        [d, rows, xhat, rstd](Node<T>& self) {
    const auto& gv = pdata(self, 1);
    const auto& dy = self.grad;
    if (wants_grad(self, 0)) {
      auto& gx = pgrad(self, 0);
      for (std::size_t r = 0; r < rows; ++r) {
        T mean_dh = T(0), mean_dh_h = T(0);
        for (std::size_t j = 0; j < d; ++j) {
          const T dh = dy[r * d + j] * gv[j];
          mean_dh += dh;
          mean_dh_h += dh * (*xhat)[r * d + j];
        }
        mean_dh /= static_cast<T>(d);
        mean_dh_h /= static_cast<T>(d);
        for (std::size_t j = 0; j < d; ++j) {
          const T dh = dy[r * d + j] * gv[j];
          gx[r * d + j] += (*rstd)[r] * (dh - mean_dh - (*xhat)[r * d + j] * mean_dh_h);
        }
      }
    }
    if (wants_grad(self, 1)) {
      auto& gg = pgrad(self, 1);
      for (std::size_t i = 0; i < dy.size(); ++i) gg[i % d] += dy[i] * (*xhat)[i];
    }
    if (wants_grad(self, 2)) {
      auto& gb = pgrad(self, 2);
      for (std::size_t i = 0; i < dy.size(); ++i) gb[i % d] += dy[i];
    }
  });
}

template <typename T>
Tensor<T> linear(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b) {
  if (w.rank() != 2) throw UsageError("linear: weight must be rank 2");
  const std::size_t k = w.dim(0), n = w.dim(1);
  if (x.shape().back() != k) {
    throw UsageError("linear: input " + shape_str(x.shape()) + " vs weight " + shape_str(w.shape()));
  }
  const bool has_bias = b.defined();
  if (has_bias && b.size() != n) throw UsageError("linear: bias size mismatch");
  const std::size_t m = x.size() / k;
  Shape out_shape = x.shape();
  out_shape.back() = n;
  std::vector<T> out(m * n);
  MapM<T> y(out.data(), m, n);
  y.noalias() = CMapM<T>(x.data().data(), m, k) * CMapM<T>(w.data().data(), k, n);
  if (has_bias) y.rowwise() += Eigen::Map<const Eigen::Matrix<T, 1, Eigen::Dynamic>>(b.data().data(), n);

  auto fn = [m, k, n](Node<T>& self) {
    CMapM<T> dy(self.grad.data(), m, n);
    if (wants_grad(self, 0)) {
      MapM<T>(pgrad(self, 0).data(), m, k).noalias() +=
          dy * CMapM<T>(pdata(self, 1).data(), k, n).transpose();
    }
    if (wants_grad(self, 1)) {
      MapM<T>(pgrad(self, 1).data(), k, n).noalias() +=
          CMapM<T>(pdata(self, 0).data(), m, k).transpose() * dy;
    }
    if (self.parents.size() > 2 && wants_grad(self, 2)) {
      Eigen::Map<Eigen::Matrix<T, 1, Eigen::Dynamic>>(pgrad(self, 2).data(), n) += dy.colwise().sum();
    }
  };
  if (has_bias) return make_result<T>(std::move(out_shape), std::move(out), {&x, &w, &b}, fn);
  return make_result<T>(std::move(out_shape), std::move(out), {&x, &w}, fn);
}

template <typename T>
Tensor<T> bmm(const Tensor<T>& a, const Tensor<T>& b, bool transpose_a, bool transpose_b) {
  if (a.rank() != 3 || b.rank() != 3 || a.dim(0) != b.dim(0)) {
    throw UsageError("bmm: expects (g, m, k) x (g, k, n), got " + shape_str(a.shape()) + " x " +
                     shape_str(b.shape()));
  }
  const std::size_t g = a.dim(0);
  const std::size_t a1 = a.dim(1), a2 = a.dim(2), b1 = b.dim(1), b2 = b.dim(2);
  const std::size_t m = transpose_a ? a2 : a1;
  const std::size_t k = transpose_a ? a1 : a2;
  const std::size_t kb = transpose_b ? b2 : b1;
  const std::size_t n = transpose_b ? b1 : b2;
  if (k != kb) {
    throw UsageError("bmm: inner dimensions differ: " + shape_str(a.shape()) + " x " + shape_str(b.shape()));
  }
  std::vector<T> out(g * m * n);
  for (std::size_t i = 0; i < g; ++i) {
    CMapM<T> A(a.data().data() + i * a1 * a2, a1, a2);
    CMapM<T> B(b.data().data() + i * b1 * b2, b1, b2);
    MapM<T> C(out.data() + i * m * n, m, n);
    if (!transpose_a && !transpose_b) C.noalias() = A * B;
    else if (!transpose_a && transpose_b) C.noalias() = A * B.transpose();
    else if (transpose_a && !transpose_b) C.noalias() = A.transpose() * B;
    else C.noalias() = A.transpose() * B.transpose();
  }
  return make_result<T>({g, m, n}, std::move(out), {&a, &b},
                        [=](Node<T>& self) {
    for (std::size_t i = 0; i < g; ++i) {
      CMapM<T> dC(self.grad.data() + i * m * n, m, n);
      CMapM<T> A(pdata(self, 0).data() + i * a1 * a2, a1, a2);
      CMapM<T> B(pdata(self, 1).data() + i * b1 * b2, b1, b2);
      if (wants_grad(self, 0)) {
        MapM<T> dA(pgrad(self, 0).data() + i * a1 * a2, a1, a2);
        // op(A) = dC op(B)^T
        if (!transpose_a && !transpose_b) dA.noalias() += dC * B.transpose();
        else if (!transpose_a && transpose_b) dA.noalias() += dC * B;
        else if (transpose_a && !transpose_b) dA.noalias() += B * dC.transpose();
        else dA.noalias() += B.transpose() * dC.transpose();
      }
      if (wants_grad(self, 1)) {
        MapM<T> dB(pgrad(self, 1).data() + i * b1 * b2, b1, b2);
        // op(B) = op(A)^T dC
        if (!transpose_a && !transpose_b) dB.noalias() += A.transpose() * dC;
        else if (!transpose_a && transpose_b) dB.noalias() += dC.transpose() * A;
        else if (transpose_a && !transpose_b) dB.noalias() += A * dC;
        else dB.noalias() += dC.transpose() * A.transpose();
      }
    }
  });
}

template <typename T>
Tensor<T> project_sequence(const Tensor<T>& x, const Tensor<T>& projection) {
  if (x.rank() != 3 || projection.rank() != 2) throw UsageError("project_sequence: bad ranks");
  const std::size_t g = x.dim(0), s = x.dim(1), d = x.dim(2);
  const std::size_t s_max = projection.dim(0), r = projection.dim(1);
  if (s > s_max) {
    throw UsageError("project_sequence: sequence length " + std::to_string(s) +
                     " exceeds projection length " + std::to_string(s_max));
  }
  std::vector<T> out(g * r * d);
  CMapM<T> P(projection.data().data(), s, r);  // top s rows
  for (std::size_t i = 0; i < g; ++i) {
    MapM<T>(out.data() + i * r * d, r, d).noalias() =
        P.transpose() * CMapM<T>(x.data().data() + i * s * d, s, d);
  }
  return make_result<T>({g, r, d}, std::move(out), {&x, &projection}, [=](Node<T>& self) {
    CMapM<T> P(pdata(self, 1).data(), s, r);
    for (std::size_t i = 0; i < g; ++i) {
      CMapM<T> dO(self.grad.data() + i * r * d, r, d);
      if (wants_grad(self, 0)) {
        MapM<T>(pgrad(self, 0).data() + i * s * d, s, d).noalias() += P * dO;
      }
      if (wants_grad(self, 1)) {
        MapM<T>(pgrad(self, 1).data(), s, r).noalias() +=
            CMapM<T>(pdata(self, 0).data() + i * s * d, s, d) * dO.transpose();
      }
    }
  });
}

namespace {

// Gathers out[i] = in[index[i]] for a permutation-like map; the backward pass
// scatters gradients through the same map.
template <typename T>
Tensor<T> gather(const Tensor<T>& in, Shape shape, std::vector<std::size_t> index) {
  const auto& x = in.data();
  std::vector<T> out(index.size());
  for (std::size_t i = 0; i < index.size(); ++i) out[i] = x[index[i]];
  auto idx = std::make_shared<std::vector<std::size_t>>(std::move(index));
  return make_result<T>(std::move(shape), std::move(out), {&in}, [idx](Node<T>& self) {
    auto& g = pgrad(self, 0);
    for (std::size_t i = 0; i < idx->size(); ++i) g[(*idx)[i]] += self.grad[i];
  });
}

}  // namespace

template <typename T>
Tensor<T> split_heads(const Tensor<T>& x, std::size_t heads) {
  if (x.rank() != 3 || heads == 0 || x.dim(2) % heads != 0) {
    throw UsageError("split_heads: cannot split " + shape_str(x.shape()) + " into " +
                     std::to_string(heads) + " heads");
  }
  const std::size_t b = x.dim(0), s = x.dim(1), a = x.dim(2) / heads;
  std::vector<std::size_t> index(x.size());
  std::size_t o = 0;
  for (std::size_t bi = 0; bi < b; ++bi)
    for (std::size_t h = 0; h < heads; ++h)
      for (std::size_t si = 0; si < s; ++si)
        for (std::size_t ai = 0; ai < a; ++ai) index[o++] = (bi * s + si) * heads * a + h * a + ai;
  return gather(x, {b * heads, s, a}, std::move(index));
}

template <typename T>
Tensor<T> merge_heads(const Tensor<T>& x, std::size_t heads) {
  if (x.rank() != 3 || heads == 0 || x.dim(0) % heads != 0) {
    throw UsageError("merge_heads: cannot merge " + shape_str(x.shape()));
  }
  const std::size_t b = x.dim(0) / heads, s = x.dim(1), a = x.dim(2);
  std::vector<std::size_t> index(x.size());
  std::size_t o = 0;
  for (std::size_t bi = 0; bi < b; ++bi)
    for (std::size_t si = 0; si < s; ++si)
      for (std::size_t h = 0; h < heads; ++h)
        for (std::size_t ai = 0; ai < a; ++ai) index[o++] = ((bi * heads + h) * s + si) * a + ai;
  return gather(x, {b, s, heads * a}, std::move(index));
}

template <typename T>
Tensor<T> take_rows(const Tensor<T>& table, std::size_t n) {
  if (table.rank() != 2 || n == 0 || n > table.dim(0)) {
    throw UsageError("take_rows: cannot take " + std::to_string(n) + " rows of " + shape_str(table.shape()));
  }
  const std::size_t e = table.dim(1);
  std::vector<std::size_t> index(n * e);
  for (std::size_t i = 0; i < index.size(); ++i) index[i] = i;
  return gather(table, {n, e}, std::move(index));
}

template <typename T>
Tensor<T> select_position(const Tensor<T>& x, std::size_t pos) {
  if (x.rank() != 3 || pos >= x.dim(1)) throw UsageError("select_position: bad position");
  const std::size_t b = x.dim(0), s = x.dim(1), e = x.dim(2);
  std::vector<std::size_t> index(b * e);
  for (std::size_t bi = 0; bi < b; ++bi)
    for (std::size_t j = 0; j < e; ++j) index[bi * e + j] = (bi * s + pos) * e + j;
  return gather(x, {b, e}, std::move(index));
}

template <typename T>
Tensor<T> mask_rows(const Tensor<T>& x, std::span<const std::size_t> lengths) {
  if (x.rank() != 3 || lengths.size() != x.dim(0)) throw UsageError("mask_rows: lengths do not match groups");
  const std::size_t s = x.dim(1), d = x.dim(2);
  std::vector<T> keep(x.size(), T(0));
  for (std::size_t g = 0; g < lengths.size(); ++g) {
    const std::size_t len = std::min(lengths[g], s);
    std::fill(keep.begin() + g * s * d, keep.begin() + (g * s + len) * d, T(1));
  }
  const auto& xv = x.data();
  std::vector<T> out(xv.size());
  for (std::size_t i = 0; i < xv.size(); ++i) out[i] = xv[i] * keep[i];
  auto k = std::make_shared<std::vector<T>>(std::move(keep));
  return make_result<T>(x.shape(), std::move(out), {&x}, [k](Node<T>& self) {
    auto& g = pgrad(self, 0);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * (*k)[i];
  });
}

template <typename T>
Tensor<T> slice_head_columns(const Tensor<T>& x, std::size_t heads, std::size_t n) {
  if (x.rank() != 3 || heads == 0 || x.dim(2) % heads != 0 || n > x.dim(2) / heads || n == 0) {
    throw UsageError("slice_head_columns: bad shape " + shape_str(x.shape()));
  }
  const std::size_t b = x.dim(0), s = x.dim(1), n_max = x.dim(2) / heads;
  std::vector<std::size_t> index(b * heads * s * n);
  std::size_t o = 0;
  for (std::size_t bi = 0; bi < b; ++bi)
    for (std::size_t h = 0; h < heads; ++h)
      for (std::size_t si = 0; si < s; ++si)
        for (std::size_t j = 0; j < n; ++j) index[o++] = (bi * s + si) * heads * n_max + h * n_max + j;
  return gather(x, {b * heads, s, n}, std::move(index));
}

template <typename T>
Tensor<T> tile_head_blocks(const Tensor<T>& x, std::size_t batch, std::size_t n) {
  if (x.rank() != 3 || x.dim(1) != x.dim(2) || n == 0 || n > x.dim(1) || batch == 0) {
    throw UsageError("tile_head_blocks: bad shape " + shape_str(x.shape()));
  }
  const std::size_t heads = x.dim(0), n_max = x.dim(1);
  std::vector<std::size_t> index(batch * heads * n * n);
  std::size_t o = 0;
  for (std::size_t bi = 0; bi < batch; ++bi)
    for (std::size_t h = 0; h < heads; ++h)
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) index[o++] = (h * n_max + i) * n_max + j;
  return gather(x, {batch * heads, n, n}, std::move(index));
}

template <typename T>
Tensor<T> embedding(const Tensor<T>& table, std::span<const std::int32_t> ids) {
  if (table.rank() != 2) throw UsageError("embedding: table must be rank 2");
  const std::size_t v = table.dim(0), e = table.dim(1);
  std::vector<std::size_t> index(ids.size() * e);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] < 0 || static_cast<std::size_t>(ids[i]) >= v) {
      throw UsageError("embedding: token id " + std::to_string(ids[i]) + " outside vocabulary of " +
                       std::to_string(v));
    }
    for (std::size_t j = 0; j < e; ++j) index[i * e + j] = static_cast<std::size_t>(ids[i]) * e + j;
  }
  return gather(table, {ids.size(), e}, std::move(index));
}

template <typename T>
Tensor<T> cross_entropy(const Tensor<T>& logits, std::span<const std::int32_t> labels) {
  if (logits.rank() != 2 || logits.dim(0) != labels.size()) {
    throw UsageError("cross_entropy: logits " + shape_str(logits.shape()) + " vs " +
                     std::to_string(labels.size()) + " labels");
  }
  const std::size_t b = logits.dim(0), c = logits.dim(1);
  const auto& x = logits.data();
  auto probs = std::make_shared<std::vector<T>>(x.size());
  T loss = T(0);
  for (std::size_t i = 0; i < b; ++i) {
    if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= c) {
      throw UsageError("cross_entropy: label out of range");
    }
    const T* row = x.data() + i * c;
    const T mx = *std::max_element(row, row + c);
    T total = T(0);
    for (std::size_t j = 0; j < c; ++j) total += std::exp(row[j] - mx);
    const T log_z = mx + std::log(total);
    for (std::size_t j = 0; j < c; ++j) (*probs)[i * c + j] = std::exp(row[j] - log_z);
    loss -= row[labels[i]] - log_z;
  }
  loss /= static_cast<T>(b);
  auto lab = std::make_shared<std::vector<std::int32_t>>(labels.begin(), labels.end());
  return make_result<T>({1}, {loss}, {&logits}, [probs, lab, b, c](Node<T>& self) {
    auto& g = pgrad(self, 0);
    const T s = self.grad[0] / static_cast<T>(b);
    for (std::size_t i = 0; i < b; ++i) {
      for (std::size_t j = 0; j < c; ++j) {
        const T target = static_cast<std::size_t>((*lab)[i]) == j ? T(1) : T(0);
        g[i * c + j] += s * ((*probs)[i * c + j] - target);
      }
    }
  });
}

template <typename T>
Tensor<T> dropout(const Tensor<T>& x, double p, Rng& rng) {
  if (p < 0.0 || p >= 1.0) throw UsageError("dropout: rate must be in [0, 1)");
  if (p == 0.0) return x;
  const T keep_scale = T(1.0 / (1.0 - p));
  auto keep = std::make_shared<std::vector<T>>(x.size());
  for (auto& k : *keep) k = rng.uniform() < p ? T(0) : keep_scale;
  const auto& xv = x.data();
  std::vector<T> out(xv.size());
  for (std::size_t i = 0; i < xv.size(); ++i) out[i] = xv[i] * (*keep)[i];
  return make_result<T>(x.shape(), std::move(out), {&x}, [keep](Node<T>& self) {
    auto& g = pgrad(self, 0);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * (*keep)[i];
  });
}

#define HETNAS_INSTANTIATE_OPS(T)                                                              \
  template Tensor<T> add(const Tensor<T>&, const Tensor<T>&);                                  \
  template Tensor<T> sub(const Tensor<T>&, const Tensor<T>&);                                  \
  template Tensor<T> mul(const Tensor<T>&, const Tensor<T>&);                                  \
  template Tensor<T> add_tiled(const Tensor<T>&, const Tensor<T>&);                            \
  template Tensor<T> scale(const Tensor<T>&, T);                                               \
  template Tensor<T> relu(const Tensor<T>&);                                                   \
  template Tensor<T> exp(const Tensor<T>&);                                                    \
  template Tensor<T> elu_plus_one(const Tensor<T>&);                                           \
  template Tensor<T> sum(const Tensor<T>&);                                                    \
  template Tensor<T> mean_of(std::span<const Tensor<T>>);                                      \
  template Tensor<T> reshape(const Tensor<T>&, Shape);                                         \
  template Tensor<T> row_sum(const Tensor<T>&);                                                \
  template Tensor<T> sub_rows(const Tensor<T>&, const Tensor<T>&);                             \
  template Tensor<T> div_rows(const Tensor<T>&, const Tensor<T>&);                             \
  template Tensor<T> masked_softmax(const Tensor<T>&, const AttentionMask*);                   \
  template Tensor<T> layer_norm(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, T);      \
  template Tensor<T> linear(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&);             \
  template Tensor<T> bmm(const Tensor<T>&, const Tensor<T>&, bool, bool);                      \
  template Tensor<T> project_sequence(const Tensor<T>&, const Tensor<T>&);                     \
  template Tensor<T> split_heads(const Tensor<T>&, std::size_t);                               \
  template Tensor<T> merge_heads(const Tensor<T>&, std::size_t);                               \
  template Tensor<T> take_rows(const Tensor<T>&, std::size_t);                                 \
  template Tensor<T> select_position(const Tensor<T>&, std::size_t);                           \
  template Tensor<T> mask_rows(const Tensor<T>&, std::span<const std::size_t>);                \
  template Tensor<T> slice_head_columns(const Tensor<T>&, std::size_t, std::size_t);           \
  template Tensor<T> tile_head_blocks(const Tensor<T>&, std::size_t, std::size_t);             \
  template Tensor<T> embedding(const Tensor<T>&, std::span<const std::int32_t>);               \
  template Tensor<T> cross_entropy(const Tensor<T>&, std::span<const std::int32_t>);           \
  template Tensor<T> dropout(const Tensor<T>&, double, Rng&);

HETNAS_INSTANTIATE_OPS(float)
HETNAS_INSTANTIATE_OPS(double)

}  // namespace hetnas
