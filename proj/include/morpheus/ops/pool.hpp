// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The MorpheusNet Authors

#pragma once

#include <string>

#include "morpheus/core/tensor.hpp"

namespace morpheus {

enum class PoolKind { kMax, kAvg };

inline const char* to_string(PoolKind k) {
  return k == PoolKind::kMax ? "max" : "avg";
}

/// Non-overlapping pooling; trailing samples that do not fill a window are
/// dropped.
template <typename T>
Tensor<T> pool1d(const Tensor<T>& x, PoolKind kind, std::size_t window) {
  const auto d = signal_dims(x, "pool1d");
  if (window == 0) throw ValueError("pool1d: window must be >= 1");
  if (window > d.length) {
    throw ShapeError("pool1d: window " + std::to_string(window) +
                     " exceeds input length " + std::to_string(d.length));
  }
  const std::size_t out_len = d.length / window;
  Tensor<T> y(signal_shape(d, d.channels, out_len));
  const std::size_t rows = d.batch * d.channels;
  for (std::size_t r = 0; r < rows; ++r) {
    const T* xr = x.data() + r * d.length;
    T* yr = y.data() + r * out_len;
    for (std::size_t o = 0; o < out_len; ++o) {
      const T* win = xr + o * window;
      T acc = win[0];
      if (kind == PoolKind::kMax) {
        for (std::size_t j = 1; j < window; ++j)
          if (win[j] > acc) acc = win[j];
      } else {
        for (std::size_t j = 1; j < window; ++j) acc += win[j];
        acc /= static_cast<T>(window);
      }
      yr[o] = acc;
    }
  }
  return y;
}

/// Max routes the gradient to the first argmax of each window; avg spreads
/// it as 1/window.
template <typename T>
Tensor<T> pool1d_backward(const Tensor<T>& x, PoolKind kind,
                          std::size_t window, const Tensor<T>& dy) {
  const auto d = signal_dims(x, "pool1d_backward");
  if (window == 0 || window > d.length)
    throw ValueError("pool1d_backward: bad window");
  const std::size_t out_len = d.length / window;
  if (dy.shape() != signal_shape(d, d.channels, out_len)) {
    throw ShapeError("pool1d_backward: gradient shape mismatch");
  }
  Tensor<T> dx(x.shape());
  const std::size_t rows = d.batch * d.channels;
  const T inv = T(1) / static_cast<T>(window);
  for (std::size_t r = 0; r < rows; ++r) {
    const T* xr = x.data() + r * d.length;
    T* dxr = dx.data() + r * d.length;
    const T* gr = dy.data() + r * out_len;
    for (std::size_t o = 0; o < out_len; ++o) {
      const std::size_t base = o * window;
      if (kind == PoolKind::kMax) {
        std::size_t best = base;
        for (std::size_t j = 1; j < window; ++j)
          if (xr[base + j] > xr[best]) best = base + j;
        dxr[best] += gr[o];
      } else {
        for (std::size_t j = 0; j < window; ++j) dxr[base + j] += gr[o] * inv;
      }
    }
  }
  return dx;
}

/// Mean over the length axis: [B, C, L] -> [B, C], [C, L] -> [C].
template <typename T>
Tensor<T> global_avg_pool(const Tensor<T>& x) {
  const auto d = signal_dims(x, "global_avg_pool");
  Tensor<T> y(d.batched ? Shape{d.batch, d.channels} : Shape{d.channels});
  for (std::size_t r = 0; r < d.batch * d.channels; ++r) {
    const T* xr = x.data() + r * d.length;
    T acc = 0;
    for (std::size_t l = 0; l < d.length; ++l) acc += xr[l];
    y[r] = acc / static_cast<T>(d.length);
  }
  return y;
}

template <typename T>
Tensor<T> global_avg_pool_backward(const Tensor<T>& x, const Tensor<T>& dy) {
  const auto d = signal_dims(x, "global_avg_pool_backward");
  if (dy.size() != d.batch * d.channels)
    throw ShapeError("global_avg_pool_backward: gradient shape mismatch");
  Tensor<T> dx(x.shape());
  const T inv = T(1) / static_cast<T>(d.length);
  for (std::size_t r = 0; r < d.batch * d.channels; ++r) {
    T* dxr = dx.data() + r * d.length;
    for (std::size_t l = 0; l < d.length; ++l) dxr[l] = dy[r] * inv;
  }
  return dx;
}

}  // namespace morpheus
