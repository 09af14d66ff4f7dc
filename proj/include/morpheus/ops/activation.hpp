// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The MorpheusNet Authors

#pragma once

#include <algorithm>
#include <cmath>

#include "morpheus/core/random.hpp"
#include "morpheus/core/tensor.hpp"
#include "morpheus/ops/batchnorm.hpp"

namespace morpheus {

template <typename T>
Tensor<T> relu(const Tensor<T>& x) {
  Tensor<T> y = x;
  for (auto& v : y.values()) v = v > T(0) ? v : T(0);
  return y;
}

/// Gradient of relu given its input `x` (the subgradient at 0 is 0).
template <typename T>
Tensor<T> relu_backward(const Tensor<T>& x, const Tensor<T>& dy) {
  if (dy.shape() != x.shape()) throw ShapeError("relu_backward: shape mismatch");
  Tensor<T> dx(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) dx[i] = x[i] > T(0) ? dy[i] : T(0);
  return dx;
}

/// Softmax over the last axis.
template <typename T>
Tensor<T> softmax(const Tensor<T>& x) {
  if (x.rank() == 0) throw ShapeError("softmax: scalar input");
  const std::size_t k = x.shape().back();
  const std::size_t rows = x.size() / k;
  Tensor<T> y(x.shape());
  for (std::size_t r = 0; r < rows; ++r) {
    const T* xr = x.data() + r * k;
    T* yr = y.data() + r * k;
    const T mx = *std::max_element(xr, xr + k);
    T sum = 0;
    for (std::size_t i = 0; i < k; ++i) {
      yr[i] = std::exp(xr[i] - mx);
      sum += yr[i];
    }
    for (std::size_t i = 0; i < k; ++i) yr[i] /= sum;
  }
  return y;
}

/// Backward through softmax given its output `y`.
template <typename T>
Tensor<T> softmax_backward(const Tensor<T>& y, const Tensor<T>& dy) {
  if (dy.shape() != y.shape()) throw ShapeError("softmax_backward: shape mismatch");
  const std::size_t k = y.shape().back();
  const std::size_t rows = y.size() / k;
  Tensor<T> dx(y.shape());
  for (std::size_t r = 0; r < rows; ++r) {
    T dot = 0;
    for (std::size_t i = 0; i < k; ++i) dot += y[r * k + i] * dy[r * k + i];
    for (std::size_t i = 0; i < k; ++i)
      dx[r * k + i] = y[r * k + i] * (dy[r * k + i] - dot);
  }
  return dx;
}

/// Inverted dropout. `mask` receives the per-element multiplier (0 or
/// 1/(1-rate)) so the backward pass is dx = dy * mask.
template <typename T>
Tensor<T> dropout(const Tensor<T>& x, double rate, Rng& rng, Mode mode,
                  Tensor<T>* mask = nullptr) {
  if (!(rate >= 0.0 && rate < 1.0))
    throw ValueError("dropout: rate must be in [0, 1), got " + std::to_string(rate));
  if (mode == Mode::kInfer || rate == 0.0) {
    if (mask) *mask = Tensor<T>(x.shape(), T(1));
    return x;
  }
  const T keep_scale = static_cast<T>(1.0 / (1.0 - rate));
  Tensor<T> m(x.shape());
  Tensor<T> y(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) {
    m[i] = rng.bernoulli(rate) ? T(0) : keep_scale;
    y[i] = x[i] * m[i];
  }
  if (mask) *mask = std::move(m);
  return y;
}

template <typename T>
Tensor<T> dropout_backward(const Tensor<T>& mask, const Tensor<T>& dy) {
  if (dy.shape() != mask.shape()) throw ShapeError("dropout_backward: shape mismatch");
  Tensor<T> dx(dy.shape());
  for (std::size_t i = 0; i < dy.size(); ++i) dx[i] = dy[i] * mask[i];
  return dx;
}

}  // namespace morpheus
