// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The MorpheusNet Authors

#pragma once

#include <cmath>
#include <functional>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "morpheus/data/epochs.hpp"
#include "morpheus/model/morpheus.hpp"
#include "morpheus/ops/adam.hpp"
#include "morpheus/ops/loss.hpp"

namespace morpheus {

struct PhaseConfig {
  double lr = 1e-3;
  std::size_t batch = 128;
  std::size_t epochs = 10;
};

struct TrainConfig {
  PhaseConfig cnn{1e-3, 128, 10};
  PhaseConfig seq{1e-4, 32, 10};
  double beta1 = 0.9;
  double beta2 = 0.999;
  std::uint64_t seed = 1;
  bool shuffle = true;
};

struct EpochStat {
  std::string phase;
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0;
  double val_accuracy = 0;
};

using History = std::vector<EpochStat>;
using EpochLogger = std::function<void(const EpochStat&)>;

inline std::string history_csv(const History& h) {
  std::string out = "phase,epoch,train_loss,val_accuracy\n";
  for (const auto& e : h)
    out += e.phase + "," + std::to_string(e.epoch) + "," + format_number(e.train_loss) + "," +
           format_number(e.val_accuracy) + "\n";
  return out;
}

struct EpochRef {
  std::size_t recording;
  std::size_t index;
};

inline std::vector<EpochRef> all_epochs(std::span<const EpochRecording> recs) {
  std::vector<EpochRef> out;
  for (std::size_t r = 0; r < recs.size(); ++r)
    for (std::size_t i = 0; i < recs[r].size(); ++i) out.push_back({r, i});
  return out;
}

/// [B, 1, L] batch from epoch references.
inline Tensor<float> gather_epochs(std::span<const EpochRecording> recs, std::span<const EpochRef> refs) {
  if (refs.empty()) throw ValueError("gather_epochs: empty batch");
  const std::size_t len = recs[refs[0].recording].epoch_len;
  Tensor<float> x(Shape{refs.size(), 1, len});
  for (std::size_t i = 0; i < refs.size(); ++i) {
    const auto e = recs[refs[i].recording].epoch(refs[i].index);
    if (e.size() != len) throw ShapeError("gather_epochs: mixed epoch lengths");
    std::copy(e.begin(), e.end(), x.data() + i * len);
  }
  return x;
}

inline std::size_t argmax(std::span<const float> v) {
  return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

/// CNN stage probabilities [n, classes] for every epoch of one recording.
inline Tensor<float> cnn_recording_probabilities(const MorpheusModel<float>& m, const EpochRecording& rec,
                                                 const QuantSim* sim = nullptr, std::size_t chunk = 200) {
  if (rec.size() == 0) throw ValueError("recording " + rec.subject + " has no epochs");
  const std::size_t K = m.config.classes;
  Tensor<float> out(Shape{rec.size(), K});
  const std::span<const EpochRecording> one(&rec, 1);
  std::vector<EpochRef> refs;
  for (std::size_t start = 0; start < rec.size(); start += chunk) {
    refs.clear();
    for (std::size_t i = start; i < std::min(rec.size(), start + chunk); ++i) refs.push_back({0, i});
    const auto p = cnn_probabilities(m, gather_epochs(one, refs), sim);
    std::copy(p.data(), p.data() + p.size(), out.data() + start * K);
  }
  return out;
}

/// Predicted classes of every epoch, recordings concatenated in order.
inline std::vector<int> cnn_predict(const MorpheusModel<float>& m, std::span<const EpochRecording> recs,
                                    const QuantSim* sim = nullptr) {
  std::vector<int> out;
  for (const auto& r : recs) {
    const auto p = cnn_recording_probabilities(m, r, sim);
    const std::size_t K = p.dim(1);
    for (std::size_t i = 0; i < r.size(); ++i)
      out.push_back(static_cast<int>(argmax(std::span<const float>(p.data() + i * K, K))));
  }
  return out;
}

inline std::vector<int> concat_labels(std::span<const EpochRecording> recs) {
  std::vector<int> out;
  for (const auto& r : recs) out.insert(out.end(), r.stages.begin(), r.stages.end());
  return out;
}

inline double accuracy(std::span<const int> pred, std::span<const int> labels) {
  if (pred.size() != labels.size()) throw ShapeError("accuracy: length mismatch");
  if (pred.empty()) return 0.0;
  std::size_t hit = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) hit += pred[i] == labels[i];
  return static_cast<double>(hit) / static_cast<double>(pred.size());
}

inline double cnn_accuracy(const MorpheusModel<float>& m, std::span<const EpochRecording> recs,
                           const QuantSim* sim = nullptr) {
  const auto pred = cnn_predict(m, recs, sim);
  return accuracy(pred, concat_labels(recs));
}

struct FitResult {
  double best_val_accuracy = 0;
  std::size_t best_epoch = 0;  // 1-based
  std::vector<double> val_accuracy;
  std::vector<double> train_loss;
};

/// Mini-batch Adam on the CNN with categorical cross-entropy; after every
/// epoch the validation accuracy is measured and the best checkpoint is kept
/// and returned in `m`. With `sim` the forward pass fake-quantizes
/// (quantization-aware fine-tuning of a folded model).
inline FitResult train_cnn(MorpheusModel<float>& m, std::span<const EpochRecording> train,
                           std::span<const EpochRecording> val, const PhaseConfig& phase, const TrainConfig& cfg,
                           const QuantSim* sim = nullptr, History* history = nullptr,
                           const EpochLogger& log = {}, const std::string& phase_name = "cnn") {
  if (total_epochs(train) == 0) throw ValueError("train_cnn: empty training set");
  if (total_epochs(val) == 0) throw ValueError("train_cnn: empty validation set");
  if (phase.batch == 0) throw ValueError("train_cnn: batch must be positive");
  Rng rng(cfg.seed);
  AdamState<float> opt(phase.lr, cfg.beta1, cfg.beta2);
  auto refs = all_epochs(train);
  FitResult res;
  MorpheusModel<float> best = m;
  res.best_val_accuracy = -1;
  std::vector<int> labels;
  for (std::size_t epoch = 1; epoch <= phase.epochs; ++epoch) {
    if (cfg.shuffle) rng.shuffle(refs.begin(), refs.end());
    double loss_sum = 0;
    std::size_t seen = 0;
    for (std::size_t start = 0; start < refs.size(); start += phase.batch) {
      const std::size_t n = std::min(phase.batch, refs.size() - start);
      if (n < 2 && !m.folded) continue;  // batch statistics need two values
      const std::span<const EpochRef> batch(refs.data() + start, n);
      labels.resize(n);
      for (std::size_t i = 0; i < n; ++i) labels[i] = train[batch[i].recording].stages[batch[i].index];
      CnnTrace<float> trace;
      const auto logits = cnn_logits(m, gather_epochs(train, batch), Mode::kTrain, sim, &trace);
      const auto ce = softmax_cross_entropy(logits, std::span<const int>(labels));
      if (!std::isfinite(ce.loss)) throw NumericError(phase_name + ": non-finite training loss", epoch);
      cnn_backward(m, trace, ce.grad, Mode::kTrain, sim);
      auto params = m.cnn_params();
      adam_step(params, opt);
      loss_sum += ce.loss * static_cast<double>(n);
      seen += n;
    }
    const double val_acc = cnn_accuracy(m, val, sim);
    const double train_loss = loss_sum / static_cast<double>(std::max<std::size_t>(seen, 1));
    res.val_accuracy.push_back(val_acc);
    res.train_loss.push_back(train_loss);
    if (val_acc > res.best_val_accuracy) {
      res.best_val_accuracy = val_acc;
      res.best_epoch = epoch;
      best = m;
    }
    const EpochStat stat{phase_name, epoch, train_loss, val_acc};
    if (history) history->push_back(stat);
    if (log) log(stat);
  }
  for (auto* p : best.cnn_params()) p->drop_grad();
  m = std::move(best);
  return res;
}

// ---------------------------------------------------------------------------
// Sequence learner

struct SeqSample {
  Tensor<float> window;  // [sequence_len, classes]
  int label = 0;
};

/// Causal window ending at epoch `t`: rows t-len+1 .. t of `probs`, with
/// positions before the first epoch filled with row 0.
inline Tensor<float> causal_window(const Tensor<float>& probs, std::size_t t, std::size_t len) {
  const std::size_t K = probs.dim(1);
  Tensor<float> w(Shape{len, K});
  for (std::size_t j = 0; j < len; ++j) {
    const std::ptrdiff_t src = static_cast<std::ptrdiff_t>(t) - static_cast<std::ptrdiff_t>(len - 1 - j);
    const std::size_t row = src < 0 ? 0 : static_cast<std::size_t>(src);
    std::copy_n(probs.data() + row * K, K, w.data() + j * K);
  }
  return w;
}

/// Full causal windows only: a recording of n epochs yields n - len + 1
/// samples (none when shorter than len), labelled with the window's last
/// epoch. Windows never cross recordings.
inline std::vector<SeqSample> make_sequence_dataset(std::span<const Tensor<float>> probs,
                                                    std::span<const EpochRecording> recs, std::size_t len) {
  if (probs.size() != recs.size()) throw ShapeError("make_sequence_dataset: one probability table per recording");
  std::vector<SeqSample> out;
  for (std::size_t r = 0; r < recs.size(); ++r) {
    if (probs[r].dim(0) != recs[r].size()) throw ShapeError("make_sequence_dataset: probability rows mismatch");
    for (std::size_t t = len - 1; t < recs[r].size(); ++t)
      out.push_back({causal_window(probs[r], t, len), recs[r].stages[t]});
  }
  return out;
}

inline std::vector<Tensor<float>> cnn_probability_tables(const MorpheusModel<float>& m,
                                                         std::span<const EpochRecording> recs,
                                                         const QuantSim* sim = nullptr) {
  std::vector<Tensor<float>> out;
  for (const auto& r : recs) out.push_back(cnn_recording_probabilities(m, r, sim));
  return out;
}

inline double seq_accuracy(const SequenceLearner<float>& s, std::span<const SeqSample> samples) {
  if (samples.empty()) return 0.0;
  std::size_t hit = 0;
  for (const auto& smp : samples) {
    const auto logits = seq_logits(s, smp.window, Mode::kInfer, nullptr);
    hit += static_cast<int>(argmax(logits.values())) == smp.label;
  }
  return static_cast<double>(hit) / static_cast<double>(samples.size());
}

/// Adam on the sequence learner only (the CNN outputs are fixed inputs);
/// returns the best-on-validation parameters in `s`.
inline FitResult train_sequence_learner(SequenceLearner<float>& s, std::span<const SeqSample> train,
                                        std::span<const SeqSample> val, const PhaseConfig& phase,
                                        const TrainConfig& cfg, History* history = nullptr,
                                        const EpochLogger& log = {}, const std::string& phase_name = "sequence") {
  if (train.empty()) throw ValueError("train_sequence_learner: empty training set");
  if (val.empty()) throw ValueError("train_sequence_learner: empty validation set");
  if (phase.batch == 0) throw ValueError("train_sequence_learner: batch must be positive");
  Rng rng(cfg.seed + 7);
  AdamState<float> opt(phase.lr, cfg.beta1, cfg.beta2);
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  FitResult res;
  res.best_val_accuracy = -1;
  SequenceLearner<float> best = s;
  const std::size_t K = s.output.weight.dim(0);
  std::vector<SeqTrace<float>> traces;
  std::vector<int> labels;
  for (std::size_t epoch = 1; epoch <= phase.epochs; ++epoch) {
    if (cfg.shuffle) rng.shuffle(order.begin(), order.end());
    double loss_sum = 0;
    for (std::size_t start = 0; start < order.size(); start += phase.batch) {
      const std::size_t n = std::min(phase.batch, order.size() - start);
      traces.assign(n, {});
      labels.resize(n);
      Tensor<float> logits(Shape{n, K});
      for (std::size_t i = 0; i < n; ++i) {
        const auto& smp = train[order[start + i]];
        const auto z = seq_logits(s, smp.window, Mode::kTrain, &rng, &traces[i]);
        std::copy_n(z.data(), K, logits.data() + i * K);
        labels[i] = smp.label;
      }
      const auto ce = softmax_cross_entropy(logits, std::span<const int>(labels));
      if (!std::isfinite(ce.loss)) throw NumericError(phase_name + ": non-finite training loss", epoch);
      for (auto* p : s.params()) {
        p->enable_grad();
        p->zero_grad();
      }
      for (std::size_t i = 0; i < n; ++i) {
        Tensor<float> row(Shape{K});
        std::copy_n(ce.grad.data() + i * K, K, row.data());
        seq_backward(s, traces[i], row);
      }
      auto params = s.params();
      adam_step(params, opt);
      loss_sum += ce.loss * static_cast<double>(n);
    }
    const double val_acc = seq_accuracy(s, val);
    const double train_loss = loss_sum / static_cast<double>(train.size());
    res.val_accuracy.push_back(val_acc);
    res.train_loss.push_back(train_loss);
    if (val_acc > res.best_val_accuracy) {
      res.best_val_accuracy = val_acc;
      res.best_epoch = epoch;
      best = s;
    }
    const EpochStat stat{phase_name, epoch, train_loss, val_acc};
    if (history) history->push_back(stat);
    if (log) log(stat);
  }
  for (auto* p : best.params()) p->drop_grad();
  s = std::move(best);
  return res;
}

/// Sequence-learner stage predictions for every epoch, using padded causal
/// windows exactly as a live stream would.
inline std::vector<int> full_predict(const MorpheusModel<float>& m, std::span<const EpochRecording> recs,
                                     const QuantSim* sim = nullptr) {
  std::vector<int> out;
  for (const auto& r : recs) {
    const auto probs = cnn_recording_probabilities(m, r, sim);
    for (std::size_t t = 0; t < r.size(); ++t) {
      const auto logits = seq_logits(m.seq, causal_window(probs, t, m.config.sequence_len), Mode::kInfer, nullptr);
      out.push_back(static_cast<int>(argmax(logits.values())));
    }
  }
  return out;
}

}  // namespace morpheus
