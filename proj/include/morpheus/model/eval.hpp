// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The MorpheusNet Authors

#pragma once

#include <deque>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "morpheus/model/train.hpp"

namespace morpheus {

struct ClassMetrics {
  std::size_t support = 0;  // label count
  double precision = 0;
  double recall = 0;
  double f1 = 0;
  double specificity = 0;
};

struct EvalReport {
  double accuracy = 0;
  double mf1 = 0;
  double sensitivity = 0;
  double specificity = 0;
  std::vector<std::vector<std::size_t>> confusion;  // [true][predicted]
  std::vector<ClassMetrics> per_class;
  std::size_t total = 0;
};

/// Accuracy plus macro F1, sensitivity and specificity (one-vs-rest). Classes
/// that never occur in `labels` are left out of the macro averages.
inline EvalReport evaluate_metrics(std::span<const int> pred, std::span<const int> labels,
                                   std::size_t classes = kNumStages) {
  if (pred.size() != labels.size())
    throw ShapeError("evaluate: " + std::to_string(pred.size()) + " predictions for " +
                     std::to_string(labels.size()) + " labels");
  EvalReport r;
  r.confusion.assign(classes, std::vector<std::size_t>(classes, 0));
  for (std::size_t i = 0; i < pred.size(); ++i) {
    for (const int v : {pred[i], labels[i]})
      if (v < 0 || static_cast<std::size_t>(v) >= classes)
        throw ValueError("evaluate: class " + std::to_string(v) + " outside [0, " + std::to_string(classes) + ")");
    ++r.confusion[static_cast<std::size_t>(labels[i])][static_cast<std::size_t>(pred[i])];
  }
  r.total = pred.size();
  std::size_t trace = 0, present = 0;
  r.per_class.resize(classes);
  for (std::size_t c = 0; c < classes; ++c) {
    std::size_t tp = r.confusion[c][c], fn = 0, fp = 0;
    for (std::size_t k = 0; k < classes; ++k) {
      if (k == c) continue;
      fn += r.confusion[c][k];
      fp += r.confusion[k][c];
    }
    const std::size_t tn = r.total - tp - fn - fp;
    trace += tp;
    auto& m = r.per_class[c];
    m.support = tp + fn;
    m.precision = tp + fp ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
    m.recall = m.support ? static_cast<double>(tp) / static_cast<double>(m.support) : 0.0;
    m.f1 = m.precision + m.recall > 0 ? 2 * m.precision * m.recall / (m.precision + m.recall) : 0.0;
    m.specificity = tn + fp ? static_cast<double>(tn) / static_cast<double>(tn + fp) : 0.0;
    if (m.support == 0) continue;
    ++present;
    r.mf1 += m.f1;
    r.sensitivity += m.recall;
    r.specificity += m.specificity;
  }
  if (r.total) r.accuracy = static_cast<double>(trace) / static_cast<double>(r.total);
  if (present) {
    r.mf1 /= static_cast<double>(present);
    r.sensitivity /= static_cast<double>(present);
    r.specificity /= static_cast<double>(present);
  }
  return r;
}

struct StreamOutput {
  int stage = 0;
  Tensor<float> probabilities;  // sequence-learner softmax
  Tensor<float> cnn_probabilities;
};

/// Per-epoch CNN stage probabilities from raw samples.
using EpochClassifier = std::function<Tensor<float>(std::span<const float>)>;

/// Real-time staging: keeps the last `window` CNN outputs and emits one
/// prediction per incoming epoch. Until the window fills it is front-padded
/// with the earliest output.
class StreamPredictor {
 public:
  StreamPredictor(const SequenceLearner<float>& seq, std::size_t window, std::size_t epoch_len, EpochClassifier cnn)
      : seq_(seq), window_(window), epoch_len_(epoch_len), cnn_(std::move(cnn)) {
    if (window_ == 0) throw ValueError("stream window must be positive");
  }

  /// Float CNN, optionally fake-quantized.
  static StreamPredictor from_model(const MorpheusModel<float>& m, const QuantSim* sim = nullptr) {
    return StreamPredictor(m.seq, m.config.sequence_len, m.config.input_len,
                           [&m, sim](std::span<const float> e) {
                             Tensor<float> x(Shape{1, 1, e.size()}, std::vector<float>(e.begin(), e.end()));
                             return cnn_probabilities(m, x, sim).reshaped({m.config.classes});
                           });
  }

  StreamOutput push(std::span<const float> epoch) {
    if (epoch.size() != epoch_len_)
      throw ShapeError("stream epoch has " + std::to_string(epoch.size()) + " samples, expected " +
                       std::to_string(epoch_len_));
    for (const float v : epoch)
      if (!std::isfinite(v)) throw ValueError("stream epoch contains a non-finite sample");
    Tensor<float> p = cnn_(epoch);  // may throw; the buffer is untouched then
    if (p.rank() != 1) throw ShapeError("classifier must return a probability vector");
    history_.push_back(p);
    if (history_.size() > window_) history_.pop_front();
    const std::size_t K = p.size();
    Tensor<float> w(Shape{window_, K});
    const std::size_t pad = window_ - history_.size();
    for (std::size_t j = 0; j < window_; ++j) {
      const auto& row = history_[j < pad ? 0 : j - pad];
      std::copy_n(row.data(), K, w.data() + j * K);
    }
    StreamOutput out;
    out.probabilities = seq_probabilities(seq_, w);
    out.stage = static_cast<int>(argmax(out.probabilities.values()));
    out.cnn_probabilities = std::move(p);
    ++position_;
    return out;
  }

  std::size_t position() const noexcept { return position_; }

  void reset() {
    history_.clear();
    position_ = 0;
  }

 private:
  const SequenceLearner<float>& seq_;
  std::size_t window_;
  std::size_t epoch_len_;
  EpochClassifier cnn_;
  std::deque<Tensor<float>> history_;
  std::size_t position_ = 0;
};

}  // namespace morpheus
