// Copyright 2026 The LSRGAN Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>

#include "lsrgan/tensor.hpp"

/// Differentiable operations on Tensor. Binary elementwise operations accept
/// exactly matching shapes, or a scalar (one element) on either side; there
/// is no other broadcasting. Expansion is explicit (expand_rows, ...).
namespace lsrgan::ops {

// Elementwise arithmetic.
template <typename T> Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b);
template <typename T> Tensor<T> sub(const Tensor<T>& a, const Tensor<T>& b);
template <typename T> Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b);
// Division by an exact zero is a DomainError.
template <typename T> Tensor<T> div(const Tensor<T>& a, const Tensor<T>& b);
template <typename T> Tensor<T> scale(const Tensor<T>& a, T factor);
template <typename T> Tensor<T> add_scalar(const Tensor<T>& a, T offset);

// Elementwise functions.
template <typename T> Tensor<T> abs(const Tensor<T>& a);
template <typename T> Tensor<T> relu(const Tensor<T>& a);
template <typename T> Tensor<T> leaky_relu(const Tensor<T>& a, T slope = T(0.2));
template <typename T> Tensor<T> sigmoid(const Tensor<T>& a);
// Non-positive arguments are a DomainError.
template <typename T> Tensor<T> log(const Tensor<T>& a);
template <typename T> Tensor<T> exp(const Tensor<T>& a);
// Gradient passes where lo <= a <= hi and is zero elsewhere.
template <typename T> Tensor<T> clamp(const Tensor<T>& a, T lo, T hi);

// Full reductions to a one-element tensor of shape [1]. Summation runs in
// flat index order.
template <typename T> Tensor<T> sum(const Tensor<T>& a);
template <typename T> Tensor<T> mean(const Tensor<T>& a);

template <typename T> Tensor<T> reshape(const Tensor<T>& a, Shape shape);
// [N, ...] -> [N, prod(...)]
template <typename T> Tensor<T> flatten(const Tensor<T>& a);

// Cross-correlation of x [N,C,H,W] with kernel [O,C,KH,KW]; output spatial
// size (H + 2*padding - KH) / stride + 1 with zero padding.
template <typename T>
Tensor<T> conv2d(const Tensor<T>& x, const Tensor<T>& kernel, std::size_t stride,
                 std::size_t padding);
// x [N,C,H,W] plus bias [C] on every pixel of channel c.
template <typename T> Tensor<T> add_channel_bias(const Tensor<T>& x, const Tensor<T>& bias);
// [N,C,H,W] -> [N,C,H*factor,W*factor] by pixel replication.
template <typename T> Tensor<T> nearest_upsample(const Tensor<T>& x, std::size_t factor);
// x [N,K] times weight [O,K] transposed, plus bias [O] when defined.
template <typename T>
Tensor<T> fully_connected(const Tensor<T>& x, const Tensor<T>& weight, const Tensor<T>& bias);

// Matrix helpers for point-set losses. All operands are rank 2.
// a [N,C], b [M,C] -> a * b^T [N,M]
template <typename T> Tensor<T> matmul_nt(const Tensor<T>& a, const Tensor<T>& b);
// [N,C] -> [1,C]
template <typename T> Tensor<T> mean_rows(const Tensor<T>& a);
// [1,C] -> [rows,C]
template <typename T> Tensor<T> expand_rows(const Tensor<T>& row, std::size_t rows);
// [N,1] -> [N,cols]
template <typename T> Tensor<T> expand_cols(const Tensor<T>& column, std::size_t cols);
// [N,M] -> [N,1]; the gradient goes to the first minimizer of each row.
template <typename T> Tensor<T> row_min(const Tensor<T>& a);
// [N,M] -> [1,M]; the gradient goes to the first maximizer of each column.
template <typename T> Tensor<T> col_max(const Tensor<T>& a);
template <typename T> Tensor<T> softmax_rows(const Tensor<T>& a);
// Divides each row by its L2 norm. A row of exactly zero norm is a
// DegenerateInputError.
template <typename T> Tensor<T> normalize_rows(const Tensor<T>& a);

// Batch item `index` of x [N,C,H,W] as H*W points of dimension C, in
// row-major pixel order: [H*W, C].
template <typename T>
Tensor<T> feature_points(const Tensor<T>& x, std::size_t index);

}  // namespace lsrgan::ops
