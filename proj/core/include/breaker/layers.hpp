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

#pragma once

#include <span>

#include "breaker/tensor.hpp"

namespace breaker {

// Concatenation of the table rows selected by `indices`. The table is
// [V x d]; the result has length indices.size() * d.
Tensor embedding_lookup(const Tensor& table, std::span<const int> indices);

// Scatters `grad_out` back into the selected rows, accumulating on repeated
// indices. `grad_table` must already have the table's [V x d] shape.
void embedding_lookup_backward(std::span<const int> indices,
                               const Tensor& grad_out, Tensor& grad_table);

// y = W x + b with W [m x n], x [n], b [m].
Tensor affine_forward(const Tensor& x, const Tensor& W, const Tensor& b);

struct AffineGrads {
  Tensor dx;  // W^T g
  Tensor dW;  // g x^T
  Tensor db;  // g
};
AffineGrads affine_backward(const Tensor& x, const Tensor& W, const Tensor& g);

Tensor relu(const Tensor& x);
Tensor relu_backward(const Tensor& x, const Tensor& g);

Tensor sigmoid(const Tensor& x);
Tensor sigmoid_backward(const Tensor& x, const Tensor& g);

double sigmoid_scalar(double x);

namespace detail {
// y[m] = W[m x n] * x[n] + b[m]; raw kernel shared by the tensor API and the
// MLP stack.
void affine_kernel(const double* W, const double* b, const double* x,
                   double* y, std::size_t m, std::size_t n);
// Given upstream g[m]: dW += g x^T, db += g, dx[n] = W^T g.
void affine_backward_kernel(const double* W, const double* x, const double* g,
                            double* dW, double* db, double* dx, std::size_t m,
                            std::size_t n);
}  // namespace detail

}  // namespace breaker
