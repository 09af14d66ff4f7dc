// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The MorpheusNet Authors

#pragma once

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "morpheus/core/random.hpp"
#include "morpheus/core/tensor.hpp"

namespace morpheus {

/// Single-layer LSTM. The four gates (input, forget, candidate, output) are
/// stacked row-wise: weight [4H, I + H] acting on [x_t; h_{t-1}], bias [4H].
template <typename T>
struct LstmParams {
  std::size_t input_size = 0;
  std::size_t hidden_size = 0;
  Tensor<T> weight;
  Tensor<T> bias;

  static LstmParams init(std::size_t input, std::size_t hidden, Rng& rng) {
    LstmParams p{input, hidden, Tensor<T>(Shape{4 * hidden, input + hidden}),
                 Tensor<T>(Shape{4 * hidden})};
    fill_glorot_uniform(p.weight, rng, input + hidden, hidden);
    // Forget-gate bias starts at 1 so early training keeps cell memory.
    for (std::size_t h = 0; h < hidden; ++h) p.bias[hidden + h] = T(1);
    return p;
  }

  std::size_t param_count() const { return weight.size() + bias.size(); }
};

template <typename T>
struct LstmGrads {
  Tensor<T> input;
  Tensor<T> weight;
  Tensor<T> bias;
};

namespace detail {

template <typename T>
T sigmoid(T v) {
  return T(1) / (T(1) + std::exp(-v));
}

template <typename T>
void check_lstm(const LstmParams<T>& p) {
  if (p.weight.rank() != 2 || p.weight.dim(0) != 4 * p.hidden_size ||
      p.weight.dim(1) != p.input_size + p.hidden_size ||
      p.bias.size() != 4 * p.hidden_size) {
    throw ShapeError("lstm: weight must be [4H, I + H] with bias [4H]");
  }
}

// gates: post-activation [i, f, g, o] of length 4H.
template <typename T>
void lstm_step(const LstmParams<T>& p, const T* x, const T* h_prev,
               const T* c_prev, T* gates, T* c, T* h) {
  const std::size_t H = p.hidden_size, I = p.input_size, W = I + H;
  for (std::size_t r = 0; r < 4 * H; ++r) {
    const T* wr = p.weight.data() + r * W;
    T acc = p.bias[r];
    for (std::size_t j = 0; j < I; ++j) acc += wr[j] * x[j];
    for (std::size_t j = 0; j < H; ++j) acc += wr[I + j] * h_prev[j];
    gates[r] = acc;
  }
  for (std::size_t j = 0; j < H; ++j) {
    const T ig = sigmoid(gates[j]);
    const T fg = sigmoid(gates[H + j]);
    const T gg = std::tanh(gates[2 * H + j]);
    const T og = sigmoid(gates[3 * H + j]);
    gates[j] = ig;
    gates[H + j] = fg;
    gates[2 * H + j] = gg;
    gates[3 * H + j] = og;
    c[j] = fg * c_prev[j] + ig * gg;
    h[j] = og * std::tanh(c[j]);
  }
}

}  // namespace detail

/// One cell evaluation; returns {h, c}.
template <typename T>
std::pair<Tensor<T>, Tensor<T>> lstm_cell(const Tensor<T>& x,
                                          const Tensor<T>& h_prev,
                                          const Tensor<T>& c_prev,
                                          const LstmParams<T>& p) {
  detail::check_lstm(p);
  if (x.size() != p.input_size || h_prev.size() != p.hidden_size ||
      c_prev.size() != p.hidden_size) {
    throw ShapeError("lstm_cell: state/input size mismatch");
  }
  std::vector<T> gates(4 * p.hidden_size);
  Tensor<T> h(Shape{p.hidden_size}), c(Shape{p.hidden_size});
  detail::lstm_step(p, x.data(), h_prev.data(), c_prev.data(), gates.data(),
                    c.data(), h.data());
  return {std::move(h), std::move(c)};
}

/// Runs the recurrence over inputs [T, I] from zero state; returns the hidden
/// states [T, H].
template <typename T>
Tensor<T> lstm_sequence(const Tensor<T>& inputs, const LstmParams<T>& p) {
  detail::check_lstm(p);
  if (inputs.rank() != 2 || inputs.dim(1) != p.input_size) {
    throw ShapeError("lstm_sequence: inputs must be [T, " +
                     std::to_string(p.input_size) + "], got " +
                     shape_to_string(inputs.shape()));
  }
  const std::size_t steps = inputs.dim(0), H = p.hidden_size;
  Tensor<T> hs(Shape{steps, H});
  std::vector<T> gates(4 * H), c(H, T(0)), c_next(H), h0(H, T(0));
  for (std::size_t t = 0; t < steps; ++t) {
    const T* h_prev = t == 0 ? h0.data() : hs.data() + (t - 1) * H;
    detail::lstm_step(p, inputs.data() + t * p.input_size, h_prev, c.data(),
                      gates.data(), c_next.data(), hs.data() + t * H);
    c.swap(c_next);
  }
  return hs;
}

/// Full backpropagation through time. `d_hidden` is dL/dh_t for every step.
template <typename T>
LstmGrads<T> lstm_sequence_backward(const Tensor<T>& inputs,
                                    const LstmParams<T>& p,
                                    const Tensor<T>& d_hidden) {
  detail::check_lstm(p);
  if (inputs.rank() != 2 || inputs.dim(1) != p.input_size)
    throw ShapeError("lstm_sequence_backward: bad input shape");
  const std::size_t steps = inputs.dim(0), H = p.hidden_size, I = p.input_size;
  const std::size_t W = I + H;
  if (d_hidden.shape() != Shape{steps, H})
    throw ShapeError("lstm_sequence_backward: gradient shape mismatch");

  // Replay the forward pass, keeping gates and cell states.
  std::vector<T> gates(steps * 4 * H), cells((steps + 1) * H, T(0)),
      hiddens((steps + 1) * H, T(0));
  for (std::size_t t = 0; t < steps; ++t) {
    detail::lstm_step(p, inputs.data() + t * I, &hiddens[t * H], &cells[t * H],
                      &gates[t * 4 * H], &cells[(t + 1) * H],
                      &hiddens[(t + 1) * H]);
  }

  LstmGrads<T> g{Tensor<T>(inputs.shape()), Tensor<T>(p.weight.shape()),
                 Tensor<T>(p.bias.shape())};
  std::vector<T> dh_next(H, T(0)), dc_next(H, T(0)), dz(4 * H);
  for (std::size_t t = steps; t-- > 0;) {
    const T* gt = &gates[t * 4 * H];
    const T* c_prev = &cells[t * H];
    const T* c_cur = &cells[(t + 1) * H];
    for (std::size_t j = 0; j < H; ++j) {
      const T ig = gt[j], fg = gt[H + j], gg = gt[2 * H + j], og = gt[3 * H + j];
      const T dh = d_hidden(t, j) + dh_next[j];
      const T tc = std::tanh(c_cur[j]);
      const T dc = dh * og * (T(1) - tc * tc) + dc_next[j];
      dz[j] = dc * gg * ig * (T(1) - ig);
      dz[H + j] = dc * c_prev[j] * fg * (T(1) - fg);
      dz[2 * H + j] = dc * ig * (T(1) - gg * gg);
      dz[3 * H + j] = dh * tc * og * (T(1) - og);
      dc_next[j] = dc * fg;
    }
    const T* x = inputs.data() + t * I;
    const T* h_prev = &hiddens[t * H];
    std::fill(dh_next.begin(), dh_next.end(), T(0));
    T* dx = g.input.data() + t * I;
    for (std::size_t r = 0; r < 4 * H; ++r) {
      const T dzr = dz[r];
      g.bias[r] += dzr;
      T* dwr = g.weight.data() + r * W;
      const T* wr = p.weight.data() + r * W;
      for (std::size_t j = 0; j < I; ++j) {
        dwr[j] += dzr * x[j];
        dx[j] += dzr * wr[j];
      }
      for (std::size_t j = 0; j < H; ++j) {
        dwr[I + j] += dzr * h_prev[j];
        dh_next[j] += dzr * wr[I + j];
      }
    }
  }
  return g;
}

}  // namespace morpheus
