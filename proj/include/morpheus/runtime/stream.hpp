// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The MorpheusNet Authors

#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "morpheus/runtime/engine.hpp"

namespace morpheus::runtime {

struct StreamStep {
  int stage = 0;
  std::span<const float> probabilities;      // sequence learner
  std::span<const float> cnn_probabilities;  // int8 CNN
};

/// Real-time staging on a flat model: int8 CNN per epoch, float sequence
/// learner over the last `sequence_len` CNN outputs, front-padded with the
/// earliest output until the window fills. Scratch space is sized once.
class StreamEngine {
 public:
  explicit StreamEngine(FlatModel model) : engine_(std::move(model)) {
    const auto& fm = engine_.model();
    K_ = fm.classes;
    H_ = fm.lstm_hidden;
    D_ = fm.dense_hidden;
    W_ = fm.sequence_len;
    if (W_ == 0) throw ValueError("flat model: sequence length must be positive");
    const float* p = fm.sequence.data();
    auto take = [&](std::size_t n) {
      std::span<const float> s(p, n);
      p += n;
      return s;
    };
    lstm_w_ = take(4 * H_ * (K_ + H_));
    lstm_b_ = take(4 * H_);
    hid_w_ = take(D_ * H_);
    hid_b_ = take(D_);
    out_w_ = take(K_ * D_);
    out_b_ = take(K_);
    history_.resize(W_ * K_);
    window_.resize(W_ * K_);
    gates_.resize(4 * H_);
    h_.resize(H_);
    h_next_.resize(H_);
    c_.resize(H_);
    c_next_.resize(H_);
    hidden_.resize(D_);
    logits_.resize(K_);
    probs_.resize(K_);
    cnn_.resize(K_);
  }

  // Weight spans point into the owned engine's model.
  StreamEngine(const StreamEngine&) = delete;
  StreamEngine& operator=(const StreamEngine&) = delete;
  StreamEngine(StreamEngine&&) = default;
  StreamEngine& operator=(StreamEngine&&) = default;

  static StreamEngine from_bytes(std::span<const std::uint8_t> bytes) {
    return StreamEngine(FlatModel::from_bytes(bytes));
  }

  /// Validates the epoch before touching any state, so a rejected chunk
  /// leaves the stream where it was.
  StreamStep push(std::span<const float> epoch) {
    const auto p = engine_.infer(epoch);
    std::copy(p.begin(), p.end(), cnn_.begin());
    // Ring of the last W outputs in arrival order.
    if (filled_ < W_) {
      std::copy(p.begin(), p.end(), history_.begin() + static_cast<std::ptrdiff_t>(filled_ * K_));
      ++filled_;
    } else {
      std::copy(history_.begin() + static_cast<std::ptrdiff_t>(K_), history_.end(), history_.begin());
      std::copy(p.begin(), p.end(), history_.end() - static_cast<std::ptrdiff_t>(K_));
    }
    const std::size_t pad = W_ - filled_;
    for (std::size_t j = 0; j < W_; ++j) {
      const std::size_t src = j < pad ? 0 : j - pad;
      std::copy_n(history_.begin() + static_cast<std::ptrdiff_t>(src * K_), K_,
                  window_.begin() + static_cast<std::ptrdiff_t>(j * K_));
    }
    sequence_forward();
    ++position_;
    const auto best = std::max_element(probs_.begin(), probs_.end()) - probs_.begin();
    return {static_cast<int>(best), probs_, cnn_};
  }

  std::size_t position() const noexcept { return position_; }
  void reset() noexcept {
    filled_ = 0;
    position_ = 0;
  }
  Engine& engine() noexcept { return engine_; }
  const Engine& engine() const noexcept { return engine_; }

 private:
  static float sigmoid(float v) { return 1.0f / (1.0f + std::exp(-v)); }

  void sequence_forward() {
    const std::size_t I = K_, Wd = K_ + H_;
    std::fill(h_.begin(), h_.end(), 0.0f);
    std::fill(c_.begin(), c_.end(), 0.0f);
    for (std::size_t t = 0; t < W_; ++t) {
      const float* x = window_.data() + t * K_;
      for (std::size_t r = 0; r < 4 * H_; ++r) {
        const float* wr = lstm_w_.data() + r * Wd;
        float acc = lstm_b_[r];
        for (std::size_t j = 0; j < I; ++j) acc += wr[j] * x[j];
        for (std::size_t j = 0; j < H_; ++j) acc += wr[I + j] * h_[j];
        gates_[r] = acc;
      }
      for (std::size_t j = 0; j < H_; ++j) {
        const float ig = sigmoid(gates_[j]);
        const float fg = sigmoid(gates_[H_ + j]);
        const float gg = std::tanh(gates_[2 * H_ + j]);
        const float og = sigmoid(gates_[3 * H_ + j]);
        c_next_[j] = fg * c_[j] + ig * gg;
        h_next_[j] = og * std::tanh(c_next_[j]);
      }
      std::swap(h_, h_next_);
      std::swap(c_, c_next_);
    }
    for (std::size_t i = 0; i < D_; ++i) {
      float acc = hid_b_[i];
      for (std::size_t j = 0; j < H_; ++j) acc += hid_w_[i * H_ + j] * h_[j];
      hidden_[i] = std::max(acc, 0.0f);
    }
    for (std::size_t i = 0; i < K_; ++i) {
      float acc = out_b_[i];
      for (std::size_t j = 0; j < D_; ++j) acc += out_w_[i * D_ + j] * hidden_[j];
      logits_[i] = acc;
    }
    const float mx = *std::max_element(logits_.begin(), logits_.end());
    float sum = 0;
    for (std::size_t i = 0; i < K_; ++i) {
      probs_[i] = std::exp(logits_[i] - mx);
      sum += probs_[i];
    }
    for (auto& v : probs_) v /= sum;
  }

  Engine engine_;
  std::size_t K_ = 0, H_ = 0, D_ = 0, W_ = 0;
  std::span<const float> lstm_w_, lstm_b_, hid_w_, hid_b_, out_w_, out_b_;
  std::vector<float> history_, window_, gates_, h_, h_next_, c_, c_next_, hidden_, logits_, probs_, cnn_;
  std::size_t filled_ = 0;
  std::size_t position_ = 0;
};

struct FullPrediction {
  int stage = 0;
  std::vector<float> probabilities;
  std::vector<float> cnn_probabilities;
};

/// Streams a recording's epochs [n, 1, L] (or [n, L]) through a fresh
/// pipeline state.
inline std::vector<FullPrediction> infer_full(StreamEngine& s, const Tensor<float>& epochs) {
  const std::size_t L = s.engine().input_len();
  if (epochs.rank() < 2 || epochs.shape().back() != L || epochs.size() != epochs.dim(0) * L)
    throw ShapeError("infer_full expects [n, 1, " + std::to_string(L) + "], got " + shape_to_string(epochs.shape()));
  s.reset();
  std::vector<FullPrediction> out;
  for (std::size_t e = 0; e < epochs.dim(0); ++e) {
    const auto step = s.push(std::span<const float>(epochs.data() + e * L, L));
    out.push_back({step.stage, {step.probabilities.begin(), step.probabilities.end()},
                   {step.cnn_probabilities.begin(), step.cnn_probabilities.end()}});
  }
  return out;
}

}  // namespace morpheus::runtime
