/*
 * Copyright 2026 Breaker Contributors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *   http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "breaker/layers.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "breaker/error.hpp"

namespace breaker {

Tensor embedding_lookup(const Tensor& table, std::span<const int> indices) {
  if (table.shape.size() != 2) {
    throw ConfigError("embedding table must be 2-D, got " +
                      shape_str(table.shape));
  }
  const std::size_t v = table.rows();
  const std::size_t d = table.cols();
  Tensor out({indices.size() * d});
  for (std::size_t p = 0; p < indices.size(); ++p) {
    const int idx = indices[p];
    if (idx < 0 || static_cast<std::size_t>(idx) >= v) {
      throw std::out_of_range("embedding index " + std::to_string(idx) +
                              " at position " + std::to_string(p) +
                              " outside table of cardinality " +
                              std::to_string(v));
    }
    const double* src = table.values.data() + static_cast<std::size_t>(idx) * d;
    double* dst = out.values.data() + p * d;
    for (std::size_t c = 0; c < d; ++c) dst[c] = src[c];
  }
  return out;
}

void embedding_lookup_backward(std::span<const int> indices,
                               const Tensor& grad_out, Tensor& grad_table) {
  const std::size_t d = grad_table.cols();
  if (grad_out.size() != indices.size() * d) {
    throw ConfigError("embedding backward: upstream " +
                      shape_str(grad_out.shape) + " does not match " +
                      std::to_string(indices.size()) + " rows of width " +
                      std::to_string(d));
  }
  for (std::size_t p = 0; p < indices.size(); ++p) {
    const auto idx = static_cast<std::size_t>(indices[p]);
    double* dst = grad_table.values.data() + idx * d;
    const double* src = grad_out.values.data() + p * d;
    for (std::size_t c = 0; c < d; ++c) dst[c] += src[c];
  }
}

namespace detail {

void affine_kernel(const double* W, const double* b, const double* x,
                   double* y, std::size_t m, std::size_t n) {
  for (std::size_t j = 0; j < m; ++j) {
    double acc = b[j];
    const double* wj = W + j * n;
    for (std::size_t c = 0; c < n; ++c) acc += wj[c] * x[c];
    y[j] = acc;
  }
}

void affine_backward_kernel(const double* W, const double* x, const double* g,
                            double* dW, double* db, double* dx, std::size_t m,
                            std::size_t n) {
  if (dx) {
    for (std::size_t c = 0; c < n; ++c) dx[c] = 0.0;
  }
  for (std::size_t j = 0; j < m; ++j) {
    const double gj = g[j];
    const double* wj = W + j * n;
    double* dwj = dW + j * n;
    db[j] += gj;
    for (std::size_t c = 0; c < n; ++c) {
      dwj[c] += gj * x[c];
      if (dx) dx[c] += wj[c] * gj;
    }
  }
}

}  // namespace detail

static void check_affine_shapes(const Tensor& x, const Tensor& W,
                                const Tensor& b) {
  if (W.shape.size() != 2 || x.shape.size() != 1 || b.shape.size() != 1 ||
      W.cols() != x.size() || W.rows() != b.size()) {
    throw ConfigError("affine shape mismatch: W " + shape_str(W.shape) +
                      ", x " + shape_str(x.shape) + ", b " +
                      shape_str(b.shape));
  }
}

Tensor affine_forward(const Tensor& x, const Tensor& W, const Tensor& b) {
  check_affine_shapes(x, W, b);
  Tensor y({W.rows()});
  detail::affine_kernel(W.values.data(), b.values.data(), x.values.data(),
                        y.values.data(), W.rows(), W.cols());
  return y;
}

AffineGrads affine_backward(const Tensor& x, const Tensor& W,
                            const Tensor& g) {
  if (g.shape.size() != 1 || g.size() != W.rows()) {
    throw ConfigError("affine backward: upstream " + shape_str(g.shape) +
                      " does not match W " + shape_str(W.shape));
  }
  AffineGrads out;
  out.dx = Tensor({W.cols()});
  out.dW = Tensor(W.shape);
  out.db = Tensor({W.rows()});
  detail::affine_backward_kernel(W.values.data(), x.values.data(),
                                 g.values.data(), out.dW.values.data(),
                                 out.db.values.data(), out.dx.values.data(),
                                 W.rows(), W.cols());
  return out;
}

Tensor relu(const Tensor& x) {
  Tensor y(x.shape);
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] > 0.0 ? x[i] : 0.0;
  return y;
}

Tensor relu_backward(const Tensor& x, const Tensor& g) {
  Tensor dx(x.shape);
  for (std::size_t i = 0; i < x.size(); ++i) dx[i] = x[i] > 0.0 ? g[i] : 0.0;
  return dx;
}

double sigmoid_scalar(double x) {
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Tensor sigmoid(const Tensor& x) {
  Tensor y(x.shape);
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = sigmoid_scalar(x[i]);
  return y;
}

Tensor sigmoid_backward(const Tensor& x, const Tensor& g) {
  Tensor dx(x.shape);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double s = sigmoid_scalar(x[i]);
    dx[i] = g[i] * s * (1.0 - s);
  }
  return dx;
}

}  // namespace breaker
