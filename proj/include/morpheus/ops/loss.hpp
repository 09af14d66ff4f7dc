// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The MorpheusNet Authors

#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>

#include "morpheus/core/tensor.hpp"

namespace morpheus {

template <typename T>
struct LossResult {
  double loss = 0;
  Tensor<T> grad;  // d loss / d logits
};

/// Mean categorical cross-entropy of softmax(logits) against class indices.
/// Gradient is (softmax - one_hot) / B.
template <typename T, typename Label>
LossResult<T> softmax_cross_entropy(const Tensor<T>& logits,
                                    std::span<const Label> labels) {
  std::size_t rows = 0, k = 0;
  if (logits.rank() == 2) {
    rows = logits.dim(0);
    k = logits.dim(1);
  } else if (logits.rank() == 1) {
    rows = 1;
    k = logits.dim(0);
  } else {
    throw ShapeError("softmax_cross_entropy: logits must be [B, K] or [K]");
  }
  if (labels.size() != rows) {
    throw ShapeError("softmax_cross_entropy: " + std::to_string(labels.size()) +
                     " labels for " + std::to_string(rows) + " rows");
  }
  LossResult<T> out{0.0, Tensor<T>(logits.shape())};
  const double inv_b = 1.0 / static_cast<double>(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    const auto label = static_cast<std::size_t>(labels[r]);
    if (static_cast<long long>(labels[r]) < 0 || label >= k) {
      throw ValueError("softmax_cross_entropy: label " +
                       std::to_string(static_cast<long long>(labels[r])) +
                       " outside [0, " + std::to_string(k) + ")");
    }
    const T* z = logits.data() + r * k;
    const double mx = *std::max_element(z, z + k);
    double sum = 0;
    for (std::size_t i = 0; i < k; ++i) sum += std::exp(z[i] - mx);
    const double log_sum = std::log(sum) + mx;
    out.loss += (log_sum - z[label]) * inv_b;
    for (std::size_t i = 0; i < k; ++i) {
      const double p = std::exp(z[i] - log_sum);
      out.grad[r * k + i] =
          static_cast<T>((p - (i == label ? 1.0 : 0.0)) * inv_b);
    }
  }
  return out;
}

}  // namespace morpheus
