// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The MorpheusNet Authors

#pragma once

#include <algorithm>
#include <cstddef>
#include <string>

#include "morpheus/core/tensor.hpp"

namespace morpheus {

enum class Padding { kValid, kSame };

/// Normal 1-D convolution (cross-correlation). weight [C_out, C_in, K],
/// bias [C_out].
template <typename T>
struct Conv1dParams {
  Tensor<T> weight;
  Tensor<T> bias;
  std::size_t stride = 1;
  Padding padding = Padding::kSame;

  std::size_t out_channels() const { return weight.dim(0); }
  std::size_t in_channels() const { return weight.dim(1); }
  std::size_t kernel_size() const { return weight.dim(2); }
  std::size_t param_count() const { return weight.size() + bias.size(); }
};

/// Depthwise [C, K] followed by pointwise [C_out, C] channel mixing plus
/// bias [C_out]. The depthwise stage carries no bias of its own.
template <typename T>
struct SeparableConv1dParams {
  Tensor<T> depthwise;
  Tensor<T> pointwise;
  Tensor<T> bias;
  std::size_t stride = 1;
  Padding padding = Padding::kSame;

  std::size_t channels() const { return depthwise.dim(0); }
  std::size_t kernel_size() const { return depthwise.dim(1); }
  std::size_t out_channels() const { return pointwise.dim(0); }
  std::size_t param_count() const {
    return depthwise.size() + pointwise.size() + bias.size();
  }
};

template <typename T>
struct Conv1dGrads {
  Tensor<T> input;
  Tensor<T> weight;
  Tensor<T> bias;
};

template <typename T>
struct SeparableConv1dGrads {
  Tensor<T> input;
  Tensor<T> depthwise;
  Tensor<T> pointwise;
  Tensor<T> bias;
};

namespace detail {

struct Window {
  std::size_t out_len;
  std::ptrdiff_t pad_left;
};

inline Window conv_window(std::size_t len, std::size_t kernel,
                          std::size_t stride, Padding padding,
                          const char* op) {
  if (len == 0) throw ShapeError(std::string(op) + ": zero-length input");
  if (kernel == 0) throw ShapeError(std::string(op) + ": zero kernel size");
  if (stride == 0) throw ShapeError(std::string(op) + ": stride must be >= 1");
  std::size_t padded = len;
  std::ptrdiff_t pad_left = 0;
  if (padding == Padding::kSame) {
    padded = len + kernel - 1;
    pad_left = static_cast<std::ptrdiff_t>((kernel - 1) / 2);
  } else if (len < kernel) {
    throw ShapeError(std::string(op) + ": input length " + std::to_string(len) +
                     " shorter than kernel " + std::to_string(kernel) +
                     " with valid padding");
  }
  return {(padded - kernel) / stride + 1, pad_left};
}

// Output range [lo, hi) for which in-index o*stride + k - pad falls in [0, len).
inline std::pair<std::size_t, std::size_t> tap_range(std::size_t k,
                                                     const Window& w,
                                                     std::size_t stride,
                                                     std::size_t len) {
  const auto s = static_cast<std::ptrdiff_t>(stride);
  const std::ptrdiff_t off = static_cast<std::ptrdiff_t>(k) - w.pad_left;
  std::ptrdiff_t lo = off >= 0 ? 0 : (-off + s - 1) / s;
  std::ptrdiff_t last_in = static_cast<std::ptrdiff_t>(len) - 1 - off;
  std::ptrdiff_t hi = last_in < 0 ? 0 : last_in / s + 1;
  hi = std::min<std::ptrdiff_t>(hi, static_cast<std::ptrdiff_t>(w.out_len));
  if (hi < lo) hi = lo;
  return {static_cast<std::size_t>(lo), static_cast<std::size_t>(hi)};
}

}  // namespace detail

/// Cross-correlation: y[b, o, l] = bias[o] + sum_{c,k} w[o, c, k] x[b, c, l*s + k - pad].
template <typename T>
Tensor<T> conv1d(const Tensor<T>& x, const Conv1dParams<T>& p) {
  const auto d = signal_dims(x, "conv1d");
  if (p.weight.rank() != 3 || p.bias.rank() != 1 ||
      p.bias.dim(0) != p.weight.dim(0)) {
    throw ShapeError("conv1d: weight must be [C_out, C_in, K] with bias [C_out]");
  }
  if (d.channels != p.in_channels()) {
    throw ShapeError("conv1d: input has " + std::to_string(d.channels) +
                     " channels, weight expects " +
                     std::to_string(p.in_channels()));
  }
  const std::size_t co_n = p.out_channels(), k_n = p.kernel_size();
  const auto w = detail::conv_window(d.length, k_n, p.stride, p.padding, "conv1d");
  Tensor<T> y(signal_shape(d, co_n, w.out_len));
  for (std::size_t b = 0; b < d.batch; ++b) {
    for (std::size_t co = 0; co < co_n; ++co) {
      T* yr = y.data() + (b * co_n + co) * w.out_len;
      std::fill(yr, yr + w.out_len, p.bias[co]);
      for (std::size_t ci = 0; ci < d.channels; ++ci) {
        const T* xr = x.data() + (b * d.channels + ci) * d.length;
        const T* wr = p.weight.data() + (co * d.channels + ci) * k_n;
        for (std::size_t k = 0; k < k_n; ++k) {
          const T wk = wr[k];
          auto [lo, hi] = detail::tap_range(k, w, p.stride, d.length);
          const std::ptrdiff_t off = static_cast<std::ptrdiff_t>(k) - w.pad_left;
          if (p.stride == 1) {
            const T* xs = xr + off;
            for (std::size_t o = lo; o < hi; ++o) yr[o] += wk * xs[o];
          } else {
            for (std::size_t o = lo; o < hi; ++o)
              yr[o] += wk * xr[static_cast<std::ptrdiff_t>(o * p.stride) + off];
          }
        }
      }
    }
  }
  return y;
}

template <typename T>
Conv1dGrads<T> conv1d_backward(const Tensor<T>& x, const Conv1dParams<T>& p,
                               const Tensor<T>& dy) {
  const auto d = signal_dims(x, "conv1d_backward");
  const std::size_t co_n = p.out_channels(), k_n = p.kernel_size();
  const auto w = detail::conv_window(d.length, k_n, p.stride, p.padding,
                                     "conv1d_backward");
  if (dy.shape() != signal_shape(d, co_n, w.out_len)) {
    throw ShapeError("conv1d_backward: upstream gradient shape " +
                     shape_to_string(dy.shape()) + " does not match output");
  }
  Conv1dGrads<T> g{Tensor<T>(x.shape()), Tensor<T>(p.weight.shape()),
                   Tensor<T>(p.bias.shape())};
  for (std::size_t b = 0; b < d.batch; ++b) {
    for (std::size_t co = 0; co < co_n; ++co) {
      const T* gr = dy.data() + (b * co_n + co) * w.out_len;
      T acc = 0;
      for (std::size_t o = 0; o < w.out_len; ++o) acc += gr[o];
      g.bias[co] += acc;
      for (std::size_t ci = 0; ci < d.channels; ++ci) {
        const T* xr = x.data() + (b * d.channels + ci) * d.length;
        T* dxr = g.input.data() + (b * d.channels + ci) * d.length;
        const T* wr = p.weight.data() + (co * d.channels + ci) * k_n;
        T* dwr = g.weight.data() + (co * d.channels + ci) * k_n;
        for (std::size_t k = 0; k < k_n; ++k) {
          auto [lo, hi] = detail::tap_range(k, w, p.stride, d.length);
          const std::ptrdiff_t off = static_cast<std::ptrdiff_t>(k) - w.pad_left;
          const T wk = wr[k];
          T dw = 0;
          for (std::size_t o = lo; o < hi; ++o) {
            const auto i = static_cast<std::ptrdiff_t>(o * p.stride) + off;
            dw += gr[o] * xr[i];
            dxr[i] += wk * gr[o];
          }
          dwr[k] += dw;
        }
      }
    }
  }
  return g;
}

/// Per-channel convolution, kernel [C, K], no bias.
template <typename T>
Tensor<T> depthwise_conv1d(const Tensor<T>& x, const Tensor<T>& kernel,
                           std::size_t stride = 1,
                           Padding padding = Padding::kSame) {
  const auto d = signal_dims(x, "depthwise_conv1d");
  if (kernel.rank() != 2 || kernel.dim(0) != d.channels) {
    throw ShapeError("depthwise_conv1d: kernel " + shape_to_string(kernel.shape()) +
                     " does not match " + std::to_string(d.channels) +
                     " input channels");
  }
  const std::size_t k_n = kernel.dim(1);
  const auto w =
      detail::conv_window(d.length, k_n, stride, padding, "depthwise_conv1d");
  Tensor<T> y(signal_shape(d, d.channels, w.out_len));
  for (std::size_t b = 0; b < d.batch; ++b) {
    for (std::size_t c = 0; c < d.channels; ++c) {
      const T* xr = x.data() + (b * d.channels + c) * d.length;
      T* yr = y.data() + (b * d.channels + c) * w.out_len;
      for (std::size_t k = 0; k < k_n; ++k) {
        const T wk = kernel(c, k);
        auto [lo, hi] = detail::tap_range(k, w, stride, d.length);
        const std::ptrdiff_t off = static_cast<std::ptrdiff_t>(k) - w.pad_left;
        if (stride == 1) {
          const T* xs = xr + off;
          for (std::size_t o = lo; o < hi; ++o) yr[o] += wk * xs[o];
        } else {
          for (std::size_t o = lo; o < hi; ++o)
            yr[o] += wk * xr[static_cast<std::ptrdiff_t>(o * stride) + off];
        }
      }
    }
  }
  return y;
}

template <typename T>
std::pair<Tensor<T>, Tensor<T>> depthwise_conv1d_backward(
    const Tensor<T>& x, const Tensor<T>& kernel, const Tensor<T>& dy,
    std::size_t stride = 1, Padding padding = Padding::kSame) {
  const auto d = signal_dims(x, "depthwise_conv1d_backward");
  const std::size_t k_n = kernel.dim(1);
  const auto w = detail::conv_window(d.length, k_n, stride, padding,
                                     "depthwise_conv1d_backward");
  if (dy.shape() != signal_shape(d, d.channels, w.out_len)) {
    throw ShapeError("depthwise_conv1d_backward: gradient shape mismatch");
  }
  Tensor<T> dx(x.shape()), dk(kernel.shape());
  for (std::size_t b = 0; b < d.batch; ++b) {
    for (std::size_t c = 0; c < d.channels; ++c) {
      const T* xr = x.data() + (b * d.channels + c) * d.length;
      T* dxr = dx.data() + (b * d.channels + c) * d.length;
      const T* gr = dy.data() + (b * d.channels + c) * w.out_len;
      for (std::size_t k = 0; k < k_n; ++k) {
        auto [lo, hi] = detail::tap_range(k, w, stride, d.length);
        const std::ptrdiff_t off = static_cast<std::ptrdiff_t>(k) - w.pad_left;
        const T wk = kernel(c, k);
        T acc = 0;
        for (std::size_t o = lo; o < hi; ++o) {
          const auto i = static_cast<std::ptrdiff_t>(o * stride) + off;
          acc += gr[o] * xr[i];
          dxr[i] += wk * gr[o];
        }
        dk(c, k) += acc;
      }
    }
  }
  return {std::move(dx), std::move(dk)};
}

/// 1x1 convolution: y[b, o, l] = bias[o] + sum_c W[o, c] x[b, c, l].
/// An empty `bias` means no bias term.
template <typename T>
Tensor<T> pointwise_conv1d(const Tensor<T>& x, const Tensor<T>& weight,
                           const Tensor<T>& bias) {
  const auto d = signal_dims(x, "pointwise_conv1d");
  if (weight.rank() != 2 || weight.dim(1) != d.channels) {
    throw ShapeError("pointwise_conv1d: weight " + shape_to_string(weight.shape()) +
                     " does not match " + std::to_string(d.channels) +
                     " input channels");
  }
  const std::size_t co_n = weight.dim(0);
  if (!bias.empty() && bias.size() != co_n) {
    throw ShapeError("pointwise_conv1d: bias length mismatch");
  }
  Tensor<T> y(signal_shape(d, co_n, d.length));
  for (std::size_t b = 0; b < d.batch; ++b) {
    for (std::size_t co = 0; co < co_n; ++co) {
      T* yr = y.data() + (b * co_n + co) * d.length;
      if (!bias.empty()) std::fill(yr, yr + d.length, bias[co]);
      for (std::size_t ci = 0; ci < d.channels; ++ci) {
        const T wv = weight(co, ci);
        const T* xr = x.data() + (b * d.channels + ci) * d.length;
        for (std::size_t l = 0; l < d.length; ++l) yr[l] += wv * xr[l];
      }
    }
  }
  return y;
}

/// Returns (dx, dW, db).
template <typename T>
Conv1dGrads<T> pointwise_conv1d_backward(const Tensor<T>& x,
                                         const Tensor<T>& weight,
                                         const Tensor<T>& dy) {
  const auto d = signal_dims(x, "pointwise_conv1d_backward");
  const std::size_t co_n = weight.dim(0);
  if (dy.shape() != signal_shape(d, co_n, d.length)) {
    throw ShapeError("pointwise_conv1d_backward: gradient shape mismatch");
  }
  Conv1dGrads<T> g{Tensor<T>(x.shape()), Tensor<T>(weight.shape()),
                   Tensor<T>(Shape{co_n})};
  for (std::size_t b = 0; b < d.batch; ++b) {
    for (std::size_t co = 0; co < co_n; ++co) {
      const T* gr = dy.data() + (b * co_n + co) * d.length;
      T bsum = 0;
      for (std::size_t l = 0; l < d.length; ++l) bsum += gr[l];
      g.bias[co] += bsum;
      for (std::size_t ci = 0; ci < d.channels; ++ci) {
        const T* xr = x.data() + (b * d.channels + ci) * d.length;
        T* dxr = g.input.data() + (b * d.channels + ci) * d.length;
        const T wv = weight(co, ci);
        T acc = 0;
        for (std::size_t l = 0; l < d.length; ++l) {
          acc += gr[l] * xr[l];
          dxr[l] += wv * gr[l];
        }
        g.weight(co, ci) += acc;
      }
    }
  }
  return g;
}

template <typename T>
void check_separable(const SeparableConv1dParams<T>& p) {
  if (p.depthwise.rank() != 2 || p.pointwise.rank() != 2 ||
      p.pointwise.dim(1) != p.depthwise.dim(0) || p.bias.rank() != 1 ||
      p.bias.dim(0) != p.pointwise.dim(0)) {
    throw ShapeError(
        "separable_conv1d: expected depthwise [C, K], pointwise [C_out, C], "
        "bias [C_out]");
  }
}

template <typename T>
Tensor<T> separable_conv1d(const Tensor<T>& x,
                           const SeparableConv1dParams<T>& p) {
  check_separable(p);
  return pointwise_conv1d(
      depthwise_conv1d(x, p.depthwise, p.stride, p.padding), p.pointwise,
      p.bias);
}

template <typename T>
SeparableConv1dGrads<T> separable_conv1d_backward(
    const Tensor<T>& x, const SeparableConv1dParams<T>& p,
    const Tensor<T>& dy) {
  check_separable(p);
  const Tensor<T> mid = depthwise_conv1d(x, p.depthwise, p.stride, p.padding);
  auto pw = pointwise_conv1d_backward(mid, p.pointwise, dy);
  auto [dx, dk] =
      depthwise_conv1d_backward(x, p.depthwise, pw.input, p.stride, p.padding);
  return {std::move(dx), std::move(dk), std::move(pw.weight),
          std::move(pw.bias)};
}

}  // namespace morpheus
