// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The MorpheusNet Authors

#pragma once

#include <string>

#include "morpheus/core/random.hpp"
#include "morpheus/core/tensor.hpp"

namespace morpheus {

/// Affine layer y = W x + b with W [m, n].
template <typename T>
struct DenseParams {
  Tensor<T> weight;
  Tensor<T> bias;

  std::size_t in_features() const { return weight.dim(1); }
  std::size_t out_features() const { return weight.dim(0); }
  std::size_t param_count() const { return weight.size() + bias.size(); }

  static DenseParams glorot(std::size_t in, std::size_t out, Rng& rng) {
    DenseParams p{Tensor<T>(Shape{out, in}), Tensor<T>(Shape{out})};
    fill_glorot_uniform(p.weight, rng, in, out);
    return p;
  }
};

template <typename T>
struct DenseGrads {
  Tensor<T> input;
  Tensor<T> weight;
  Tensor<T> bias;
};

namespace detail {

template <typename T>
std::size_t dense_rows(const Tensor<T>& x, const DenseParams<T>& p,
                       const char* op) {
  if (p.weight.rank() != 2 || p.bias.size() != p.weight.dim(0)) {
    throw ShapeError(std::string(op) + ": weight must be [m, n] with bias [m]");
  }
  const std::size_t n = p.weight.dim(1);
  if (x.rank() == 1 && x.dim(0) == n) return 1;
  if (x.rank() == 2 && x.dim(1) == n) return x.dim(0);
  throw ShapeError(std::string(op) + ": input " + shape_to_string(x.shape()) +
                   " incompatible with weight " +
                   shape_to_string(p.weight.shape()));
}

}  // namespace detail

/// Accepts [n] or a batch [B, n].
template <typename T>
Tensor<T> dense(const Tensor<T>& x, const DenseParams<T>& p) {
  const std::size_t rows = detail::dense_rows(x, p, "dense");
  const std::size_t m = p.weight.dim(0), n = p.weight.dim(1);
  Tensor<T> y(x.rank() == 1 ? Shape{m} : Shape{rows, m});
  for (std::size_t r = 0; r < rows; ++r) {
    const T* xr = x.data() + r * n;
    for (std::size_t i = 0; i < m; ++i) {
      const T* wr = p.weight.data() + i * n;
      T acc = p.bias[i];
      for (std::size_t j = 0; j < n; ++j) acc += wr[j] * xr[j];
      y[r * m + i] = acc;
    }
  }
  return y;
}

template <typename T>
DenseGrads<T> dense_backward(const Tensor<T>& x, const DenseParams<T>& p,
                             const Tensor<T>& dy) {
  const std::size_t rows = detail::dense_rows(x, p, "dense_backward");
  const std::size_t m = p.weight.dim(0), n = p.weight.dim(1);
  if (dy.size() != rows * m)
    throw ShapeError("dense_backward: gradient shape mismatch");
  DenseGrads<T> g{Tensor<T>(x.shape()), Tensor<T>(p.weight.shape()),
                  Tensor<T>(p.bias.shape())};
  for (std::size_t r = 0; r < rows; ++r) {
    const T* xr = x.data() + r * n;
    T* dxr = g.input.data() + r * n;
    for (std::size_t i = 0; i < m; ++i) {
      const T gi = dy[r * m + i];
      g.bias[i] += gi;
      const T* wr = p.weight.data() + i * n;
      T* dwr = g.weight.data() + i * n;
      for (std::size_t j = 0; j < n; ++j) {
        dwr[j] += gi * xr[j];
        dxr[j] += gi * wr[j];
      }
    }
  }
  return g;
}

}  // namespace morpheus
