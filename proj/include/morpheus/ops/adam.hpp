// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The MorpheusNet Authors

#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "morpheus/core/tensor.hpp"

namespace morpheus {

/// Adam with bias-corrected moments. Moment buffers are created on the first
/// step and must keep matching the parameter list afterwards.
template <typename T>
struct AdamState {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::vector<std::vector<T>> m;
  std::vector<std::vector<T>> v;
  std::size_t t = 0;

  explicit AdamState(double learning_rate = 1e-3, double b1 = 0.9,
                     double b2 = 0.999, double eps = 1e-8)
      : lr(learning_rate), beta1(b1), beta2(b2), epsilon(eps) {}
};

/// Applies one update using each parameter's gradient buffer. Parameters
/// without a gradient buffer are treated as having zero gradient.
template <typename T>
void adam_step(std::span<Tensor<T>* const> params, AdamState<T>& state) {
  if (state.m.empty()) {
    for (auto* p : params) {
      state.m.emplace_back(p->size(), T(0));
      state.v.emplace_back(p->size(), T(0));
    }
  }
  if (state.m.size() != params.size()) {
    throw ShapeError("adam_step: optimizer tracks " +
                     std::to_string(state.m.size()) + " tensors, got " +
                     std::to_string(params.size()));
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (state.m[i].size() != params[i]->size()) {
      throw ShapeError("adam_step: parameter " + std::to_string(i) +
                       " changed size");
    }
  }
  ++state.t;
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.t));
  const T b1 = static_cast<T>(state.beta1), b2 = static_cast<T>(state.beta2);
  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor<T>& p = *params[i];
    if (!p.has_grad()) continue;
    auto g = p.grad();
    auto& m = state.m[i];
    auto& v = state.v[i];
    for (std::size_t j = 0; j < p.size(); ++j) {
      m[j] = b1 * m[j] + (T(1) - b1) * g[j];
      v[j] = b2 * v[j] + (T(1) - b2) * g[j] * g[j];
      const double mhat = m[j] / bc1;
      const double vhat = v[j] / bc2;
      p[j] = static_cast<T>(p[j] - state.lr * mhat / (std::sqrt(vhat) + state.epsilon));
    }
  }
}

template <typename T>
void adam_step(std::vector<Tensor<T>*>& params, AdamState<T>& state) {
  adam_step(std::span<Tensor<T>* const>(params.data(), params.size()), state);
}

}  // namespace morpheus
