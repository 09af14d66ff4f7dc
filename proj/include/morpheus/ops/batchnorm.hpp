// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The MorpheusNet Authors

#pragma once

#include <cmath>
#include <string>

#include "morpheus/core/tensor.hpp"
#include "morpheus/ops/conv.hpp"

namespace morpheus {

enum class Mode { kTrain, kInfer };

/// Per-channel batch normalization state. Running statistics follow
/// running = momentum * running + (1 - momentum) * batch, with the biased
/// batch variance.
template <typename T>
struct BatchNormState {
  Tensor<T> gamma;
  Tensor<T> beta;
  Tensor<T> running_mean;
  Tensor<T> running_var;
  double momentum = 0.99;
  double epsilon = 1e-5;

  static BatchNormState identity(std::size_t channels) {
    BatchNormState s;
    s.gamma = Tensor<T>(Shape{channels}, T(1));
    s.beta = Tensor<T>(Shape{channels}, T(0));
    s.running_mean = Tensor<T>(Shape{channels}, T(0));
    s.running_var = Tensor<T>(Shape{channels}, T(1));
    return s;
  }

  std::size_t channels() const { return gamma.size(); }
  std::size_t param_count() const { return gamma.size() + beta.size(); }
};

template <typename T>
struct BatchNormGrads {
  Tensor<T> input;
  Tensor<T> gamma;
  Tensor<T> beta;
};

namespace detail {

template <typename T>
void batch_stats(const Tensor<T>& x, const SignalDims& d, std::size_t c,
                 double& mean, double& var) {
  const double n = static_cast<double>(d.batch * d.length);
  double s = 0;
  for (std::size_t b = 0; b < d.batch; ++b) {
    const T* xr = x.data() + (b * d.channels + c) * d.length;
    for (std::size_t l = 0; l < d.length; ++l) s += xr[l];
  }
  mean = s / n;
  double ss = 0;
  for (std::size_t b = 0; b < d.batch; ++b) {
    const T* xr = x.data() + (b * d.channels + c) * d.length;
    for (std::size_t l = 0; l < d.length; ++l) {
      const double dv = xr[l] - mean;
      ss += dv * dv;
    }
  }
  var = ss / n;
}

template <typename T>
void check_bn(const SignalDims& d, const BatchNormState<T>& s, Mode mode,
              const char* op) {
  if (s.gamma.size() != d.channels || s.beta.size() != d.channels ||
      s.running_mean.size() != d.channels || s.running_var.size() != d.channels) {
    throw ShapeError(std::string(op) + ": state has " +
                     std::to_string(s.gamma.size()) + " channels, input has " +
                     std::to_string(d.channels));
  }
  if (mode == Mode::kTrain && d.batch * d.length < 2) {
    throw ValueError(std::string(op) +
                     ": training mode needs at least 2 values per channel");
  }
}

}  // namespace detail

/// Normalizes [B, C, L] (or [C, L]) per channel. Train mode uses batch
/// statistics and updates the running estimates in `state`.
template <typename T>
Tensor<T> batchnorm1d(const Tensor<T>& x, BatchNormState<T>& state, Mode mode) {
  const auto d = signal_dims(x, "batchnorm1d");
  detail::check_bn(d, state, mode, "batchnorm1d");
  Tensor<T> y(x.shape());
  for (std::size_t c = 0; c < d.channels; ++c) {
    double mean, var;
    if (mode == Mode::kTrain) {
      detail::batch_stats(x, d, c, mean, var);
      const double m = state.momentum;
      state.running_mean[c] =
          static_cast<T>(m * state.running_mean[c] + (1 - m) * mean);
      state.running_var[c] =
          static_cast<T>(m * state.running_var[c] + (1 - m) * var);
    } else {
      mean = state.running_mean[c];
      var = state.running_var[c];
    }
    const T inv = static_cast<T>(1.0 / std::sqrt(var + state.epsilon));
    const T g = state.gamma[c], bt = state.beta[c], mu = static_cast<T>(mean);
    for (std::size_t b = 0; b < d.batch; ++b) {
      const T* xr = x.data() + (b * d.channels + c) * d.length;
      T* yr = y.data() + (b * d.channels + c) * d.length;
      for (std::size_t l = 0; l < d.length; ++l)
        yr[l] = (xr[l] - mu) * inv * g + bt;
    }
  }
  return y;
}

/// Backward pass; batch statistics are recomputed from `x` in train mode.
template <typename T>
BatchNormGrads<T> batchnorm1d_backward(const Tensor<T>& x,
                                       const BatchNormState<T>& state,
                                       Mode mode, const Tensor<T>& dy) {
  const auto d = signal_dims(x, "batchnorm1d_backward");
  detail::check_bn(d, state, mode, "batchnorm1d_backward");
  if (dy.shape() != x.shape())
    throw ShapeError("batchnorm1d_backward: gradient shape mismatch");
  BatchNormGrads<T> g{Tensor<T>(x.shape()), Tensor<T>(Shape{d.channels}),
                      Tensor<T>(Shape{d.channels})};
  const double n = static_cast<double>(d.batch * d.length);
  for (std::size_t c = 0; c < d.channels; ++c) {
    double mean, var;
    if (mode == Mode::kTrain) {
      detail::batch_stats(x, d, c, mean, var);
    } else {
      mean = state.running_mean[c];
      var = state.running_var[c];
    }
    const double inv = 1.0 / std::sqrt(var + state.epsilon);
    double sum_dy = 0, sum_dy_xhat = 0;
    for (std::size_t b = 0; b < d.batch; ++b) {
      const T* xr = x.data() + (b * d.channels + c) * d.length;
      const T* gr = dy.data() + (b * d.channels + c) * d.length;
      for (std::size_t l = 0; l < d.length; ++l) {
        sum_dy += gr[l];
        sum_dy_xhat += gr[l] * (xr[l] - mean) * inv;
      }
    }
    g.beta[c] = static_cast<T>(sum_dy);
    g.gamma[c] = static_cast<T>(sum_dy_xhat);
    const double gam = state.gamma[c];
    for (std::size_t b = 0; b < d.batch; ++b) {
      const T* xr = x.data() + (b * d.channels + c) * d.length;
      const T* gr = dy.data() + (b * d.channels + c) * d.length;
      T* dxr = g.input.data() + (b * d.channels + c) * d.length;
      if (mode == Mode::kTrain) {
        for (std::size_t l = 0; l < d.length; ++l) {
          const double xhat = (xr[l] - mean) * inv;
          dxr[l] = static_cast<T>(gam * inv / n *
                                  (n * gr[l] - sum_dy - xhat * sum_dy_xhat));
        }
      } else {
        for (std::size_t l = 0; l < d.length; ++l)
          dxr[l] = static_cast<T>(gr[l] * gam * inv);
      }
    }
  }
  return g;
}

/// Smallest var + epsilon accepted by fold_batchnorm.
inline constexpr double kMinFoldVariance = 1e-12;

namespace detail {

template <typename T>
std::vector<double> fold_scales(const BatchNormState<T>& bn) {
  std::vector<double> scale(bn.channels());
  for (std::size_t c = 0; c < bn.channels(); ++c) {
    const double denom = static_cast<double>(bn.running_var[c]) + bn.epsilon;
    if (!(denom >= kMinFoldVariance)) {
      throw ValueError("fold_batchnorm: channel " + std::to_string(c) +
                       " has degenerate running variance " +
                       std::to_string(static_cast<double>(bn.running_var[c])));
    }
    scale[c] = bn.gamma[c] / std::sqrt(denom);
  }
  return scale;
}

}  // namespace detail

/// Folds inference-mode batch norm into the preceding convolution so that
/// conv_folded(x) == bn(conv(x)).
template <typename T>
Conv1dParams<T> fold_batchnorm(const Conv1dParams<T>& conv,
                               const BatchNormState<T>& bn) {
  if (bn.channels() != conv.out_channels())
    throw ShapeError("fold_batchnorm: channel count mismatch");
  const auto scale = detail::fold_scales(bn);
  Conv1dParams<T> out = conv;
  const std::size_t per = conv.in_channels() * conv.kernel_size();
  for (std::size_t o = 0; o < conv.out_channels(); ++o) {
    for (std::size_t i = 0; i < per; ++i)
      out.weight[o * per + i] = static_cast<T>(conv.weight[o * per + i] * scale[o]);
    out.bias[o] = static_cast<T>((conv.bias[o] - bn.running_mean[o]) * scale[o] +
                                 bn.beta[o]);
  }
  return out;
}

/// Separable variant: the normalization scale lands on the pointwise rows.
template <typename T>
SeparableConv1dParams<T> fold_batchnorm(const SeparableConv1dParams<T>& conv,
                                        const BatchNormState<T>& bn) {
  if (bn.channels() != conv.out_channels())
    throw ShapeError("fold_batchnorm: channel count mismatch");
  const auto scale = detail::fold_scales(bn);
  SeparableConv1dParams<T> out = conv;
  const std::size_t cin = conv.channels();
  for (std::size_t o = 0; o < conv.out_channels(); ++o) {
    for (std::size_t i = 0; i < cin; ++i)
      out.pointwise(o, i) = static_cast<T>(conv.pointwise(o, i) * scale[o]);
    out.bias[o] = static_cast<T>((conv.bias[o] - bn.running_mean[o]) * scale[o] +
                                 bn.beta[o]);
  }
  return out;
}

}  // namespace morpheus
