// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The MorpheusNet Authors

#pragma once

#include <algorithm>
#include <cmath>

#include "morpheus/core/tensor.hpp"

namespace morpheus {

/// Central differences (f(x + eps e_i) - f(x - eps e_i)) / (2 eps) for every
/// element of x, accumulated in long double.
template <typename F>
Tensor<double> finite_difference_gradient(F&& f, const Tensor<double>& x,
                                          double epsilon = 1e-4) {
  if (!(epsilon > 0)) throw ValueError("finite_difference_gradient: epsilon must be > 0");
  Tensor<double> probe = x;
  Tensor<double> grad(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double orig = probe[i];
    probe[i] = orig + epsilon;
    const long double up = f(static_cast<const Tensor<double>&>(probe));
    probe[i] = orig - epsilon;
    const long double down = f(static_cast<const Tensor<double>&>(probe));
    probe[i] = orig;
    grad[i] = static_cast<double>((up - down) / (2.0L * epsilon));
  }
  return grad;
}

/// max_i |a_i - b_i| / max(|a_i|, |b_i|, floor), where the floor is
/// `floor_fraction` of the largest |b_j| (entries that are numerically zero
/// relative to the rest of the gradient are compared on that scale).
inline double max_relative_error(const Tensor<double>& a, const Tensor<double>& b,
                                 double floor_fraction = 1e-2) {
  if (a.shape() != b.shape()) throw ShapeError("max_relative_error: shape mismatch");
  double scale = 0;
  for (std::size_t i = 0; i < b.size(); ++i) scale = std::max(scale, std::abs(b[i]));
  const double floor = std::max(scale * floor_fraction, 1e-10);
  double worst = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double denom = std::max({std::abs(a[i]), std::abs(b[i]), floor});
    worst = std::max(worst, std::abs(a[i] - b[i]) / denom);
  }
  return worst;
}

}  // namespace morpheus
