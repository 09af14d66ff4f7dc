// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The MorpheusNet Authors

#include <gtest/gtest.h>

#include "morpheus/data/synth.hpp"
#include "morpheus/model/checkpoint.hpp"
#include "morpheus/model/eval.hpp"
#include "morpheus/model/train.hpp"
#include "support/oracles.hpp"
#include "support/param_count.hpp"

using namespace morpheus;
using morpheus::oracle::dot;
using morpheus::oracle::random_tensor;

namespace {

MorpheusConfig tiny_config() {
  MorpheusConfig c;
  c.input_len = 64;
  c.layers = {LayerSpec::start(4, 5, 2), LayerSpec::conv_block(6, 3), LayerSpec::pooling(PoolKind::kMax, 2),
              LayerSpec::identity_block(6, 3), LayerSpec::pooling(PoolKind::kAvg, 2)};
  c.lstm_hidden = 6;
  c.dense_hidden = 5;
  c.sequence_len = 4;
  return c;
}

// Small config sized for 300-sample synthetic epochs.
MorpheusConfig short_epoch_config() {
  MorpheusConfig c;
  c.input_len = 300;
  c.layers = {LayerSpec::start(8, 16, 4), LayerSpec::conv_block(16, 8), LayerSpec::pooling(PoolKind::kAvg, 4),
              LayerSpec::identity_block(16, 8)};
  c.sequence_len = 4;
  return c;
}

std::vector<EpochRecording> short_synth(std::size_t subjects, std::size_t epochs, std::uint64_t seed) {
  SynthOptions o;
  o.epoch_len = 300;
  return synth_dataset(subjects, epochs, seed, o);
}

void randomize_bn(MorpheusModel<double>& m, Rng& rng) {
  for (auto& b : m.blocks) {
    if (!b.has_bn()) continue;
    for (auto* t : {&b.bn.gamma, &b.bn.beta, &b.bn.running_mean}) fill_uniform(*t, rng, -0.5, 0.5);
    for (auto& g : b.bn.gamma.values()) g += 1.0;
    fill_uniform(b.bn.running_var, rng, 0.5, 1.5);
  }
  for (auto& b : m.blocks) {
    for (auto& [n, p] : b.named_params())
      if (n.find("bias") != std::string::npos) fill_uniform(*p, rng, -0.2, 0.2);
  }
}

}  // namespace

// --- counting ----------------------------------------------------------------

TEST(ParamCount, DenseAndLstmClosedForms) {
  Rng rng(1);
  EXPECT_EQ(DenseParams<float>::glorot(32, 5, rng).param_count(), 165u);
  EXPECT_EQ(LstmParams<float>::init(5, 32, rng).param_count(), 4u * (32 * 37 + 32));
  EXPECT_EQ(LstmParams<float>::init(5, 32, rng).param_count(), 4864u);
}

TEST(ParamCount, DefaultModelPinned) {
  const auto cfg = MorpheusConfig::defaults();
  const auto m = build_morpheus<float>(cfg, 1);
  EXPECT_EQ(param_count(m), oracle::counted_params(cfg));
  EXPECT_EQ(param_count(m), 19034u);
  EXPECT_EQ(cnn_param_count(m), 12949u);
  EXPECT_EQ(m.seq.param_count(), 6085u);
  EXPECT_GE(param_count(m), 15000u);
  EXPECT_LE(param_count(m), 25000u);
}

TEST(ParamCount, MatchesClosedFormOnOtherConfigs) {
  for (const auto& cfg : {tiny_config(), short_epoch_config()})
    EXPECT_EQ(param_count(build_morpheus<float>(cfg, 2)), oracle::counted_params(cfg));
}

TEST(ParamCount, RunningStatisticsExcluded) {
  auto m = build_morpheus<float>(MorpheusConfig::defaults(), 1);
  std::size_t n = 0;
  for (auto& [name, t] : m.named_tensors())
    if (name.find("running") == std::string::npos) n += t->size();
  EXPECT_EQ(n, param_count(m));
}

// --- config ------------------------------------------------------------------

TEST(Config, DefaultShapes) {
  const auto shapes = MorpheusConfig::defaults().trace_shapes();
  ASSERT_EQ(shapes.size(), 7u);
  EXPECT_EQ(shapes[0], (std::pair<std::size_t, std::size_t>{16, 750}));
  EXPECT_EQ(shapes.back(), (std::pair<std::size_t, std::size_t>{64, 46}));
}

TEST(Config, TextRoundTrip) {
  for (const auto& cfg : {MorpheusConfig::defaults(), tiny_config()})
    EXPECT_EQ(MorpheusConfig::from_text(cfg.to_text()), cfg);
}

TEST(Config, IdentityBlockMustKeepChannels) {
  auto c = tiny_config();
  c.layers.push_back(LayerSpec::identity_block(12, 3));
  EXPECT_THROW(c.validate(), ShapeError);
}

TEST(Config, BlockNames) {
  const auto names = block_names(MorpheusConfig::defaults());
  ASSERT_EQ(names.size(), 7u);
  EXPECT_EQ(names[0], "start");
  EXPECT_EQ(names[1], "conv_block_1");
  EXPECT_EQ(names[3], "identity_block_1");
  EXPECT_EQ(names[6], "identity_block_2");
}

// --- forward ------------------------------------------------------------------

TEST(CnnForward, ZeroInputGivesProbabilities) {
  const auto m = build_morpheus<float>(MorpheusConfig::defaults(), 3);
  const auto p = cnn_forward(m, Tensor<float>(Shape{3000}));
  ASSERT_EQ(p.size(), 5u);
  double s = 0;
  for (const float v : p.values()) {
    EXPECT_TRUE(std::isfinite(v));
    EXPECT_GE(v, 0.0f);
    s += v;
  }
  EXPECT_NEAR(s, 1.0, 1e-6);
}

TEST(CnnForward, DeterministicInInference) {
  const auto m = build_morpheus<float>(MorpheusConfig::defaults(), 3);
  Rng rng(4);
  Tensor<float> x(Shape{3000});
  fill_uniform(x, rng, -2, 2);
  EXPECT_EQ(cnn_forward(m, x), cnn_forward(m, x));
}

TEST(CnnForward, WrongLengthRejected) {
  const auto m = build_morpheus<float>(MorpheusConfig::defaults(), 3);
  EXPECT_THROW(cnn_forward(m, Tensor<float>(Shape{2999})), ShapeError);
}

TEST(CnnForward, BatchRowsMatchSingleEpochs) {
  const auto m = build_morpheus<float>(short_epoch_config(), 3);
  Rng rng(5);
  Tensor<float> x(Shape{3, 1, 300});
  fill_uniform(x, rng, -1, 1);
  const auto p = cnn_probabilities(m, x);
  for (std::size_t b = 0; b < 3; ++b) {
    Tensor<float> one(Shape{300}, std::vector<float>(x.data() + b * 300, x.data() + (b + 1) * 300));
    const auto q = cnn_forward(m, one);
    for (std::size_t k = 0; k < 5; ++k) EXPECT_FLOAT_EQ(p(b, k), q[k]);
  }
}

TEST(CnnForward, ZeroedIdentityBranchIsExactIdentity) {
  auto m = build_morpheus<double>(tiny_config(), 6);
  Rng rng(6);
  const auto x = random_tensor({2, 6, 16}, rng);
  auto& blk = m.blocks[3];
  ASSERT_EQ(blk.spec.kind, BlockKind::kIdentityBlock);
  blk.sep.depthwise.fill(0);
  blk.sep.pointwise.fill(0);
  blk.sep.bias.fill(0);
  const auto y = detail::block_forward<double>(blk, x, Mode::kInfer, false, nullptr, nullptr);
  EXPECT_EQ(y, x);
}

TEST(CnnForward, FoldedModelMatches) {
  auto m = build_morpheus<double>(tiny_config(), 7);
  Rng rng(7);
  randomize_bn(m, rng);
  const auto f = fold_model(m);
  EXPECT_TRUE(f.folded);
  const auto x = random_tensor({3, 1, 64}, rng);
  const auto a = cnn_logits(m, x, Mode::kInfer);
  const auto b = cnn_logits(const_cast<MorpheusModel<double>&>(f), x, Mode::kInfer);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], 1e-9);
  EXPECT_LT(cnn_param_count(f), cnn_param_count(m));
}

// --- gradients ------------------------------------------------------------------

TEST(CnnBackward, MatchesFiniteDifferencesInference) {
  auto m = build_morpheus<double>(tiny_config(), 8);
  Rng rng(8);
  randomize_bn(m, rng);
  const auto x = random_tensor({2, 1, 64}, rng);
  const auto r = random_tensor({2, 5}, rng);
  CnnTrace<double> trace;
  cnn_logits(m, x, Mode::kInfer, nullptr, &trace);
  cnn_backward(m, trace, r, Mode::kInfer);
  // Every trainable tensor, checked by perturbing a copy of the model.
  const auto base = m;
  auto probe_loss = [&](const std::string& target, const Tensor<double>& v) {
    auto q = base;
    for (auto& [n, t] : q.named_cnn_state())
      if (n == target) *t = v;
    return dot(r, cnn_logits(q, x, Mode::kInfer));
  };
  for (auto& [name, p] : m.named_cnn_state()) {
    if (name.find("running") != std::string::npos) continue;
    Tensor<double> analytic(p->shape(), std::vector<double>(p->grad().begin(), p->grad().end()));
    const auto numeric = finite_difference_gradient(
        [&, n = name](const Tensor<double>& v) { return probe_loss(n, v); }, *p, 1e-6);
    EXPECT_LT(max_relative_error(analytic, numeric), 1e-4) << name;
  }
}

TEST(CnnBackward, MatchesFiniteDifferencesTrainingStatistics) {
  auto m = build_morpheus<double>(tiny_config(), 9);
  Rng rng(9);
  randomize_bn(m, rng);
  const auto x = random_tensor({3, 1, 64}, rng);
  const auto r = random_tensor({3, 5}, rng);
  CnnTrace<double> trace;
  auto work = m;
  cnn_logits(work, x, Mode::kTrain, nullptr, &trace);
  cnn_backward(work, trace, r, Mode::kTrain);
  auto probe_loss = [&](const std::string& target, const Tensor<double>& v) {
    auto q = m;
    for (auto& [n, t] : q.named_cnn_state())
      if (n == target) *t = v;
    return dot(r, cnn_logits(q, x, Mode::kTrain));
  };
  for (auto& [name, p] : work.named_cnn_state()) {
    if (name.find("running") != std::string::npos) continue;
    Tensor<double> analytic(p->shape(), std::vector<double>(p->grad().begin(), p->grad().end()));
    auto* orig = [&] {
      for (auto& [n, t] : m.named_cnn_state())
        if (n == name) return t;
      return static_cast<Tensor<double>*>(nullptr);
    }();
    ASSERT_NE(orig, nullptr);
    const auto numeric = finite_difference_gradient(
        [&, n = name](const Tensor<double>& v) { return probe_loss(n, v); }, *orig, 1e-6);
    // A bias feeding batch statistics cancels out: both sides must vanish.
    double scale = 0;
    for (const double v : numeric.values()) scale = std::max(scale, std::abs(v));
    if (scale < 1e-8) {
      for (const double v : analytic.values()) EXPECT_LT(std::abs(v), 1e-10) << name;
      continue;
    }
    EXPECT_LT(max_relative_error(analytic, numeric), 1e-4) << name;
  }
}

TEST(SeqBackward, MatchesFiniteDifferences) {
  auto cfg = tiny_config();
  Rng rng(10);
  auto s = build_sequence_learner<double>(cfg, rng);
  for (auto* p : s.params()) fill_uniform(*p, rng, -0.5, 0.5);
  const auto w = random_tensor({4, 5}, rng, 0, 1);
  const auto r = random_tensor({5}, rng);
  for (auto* p : s.params()) {
    p->enable_grad();
    p->zero_grad();
  }
  SeqTrace<double> t;
  seq_logits(s, w, Mode::kInfer, nullptr, &t);
  seq_backward(s, t, r);
  const auto base = s;
  for (std::size_t i = 0; i < s.params().size(); ++i) {
    Tensor<double>* p = s.params()[i];
    Tensor<double> analytic(p->shape(), std::vector<double>(p->grad().begin(), p->grad().end()));
    const auto numeric = finite_difference_gradient(
        [&](const Tensor<double>& v) {
          auto q = base;
          *q.params()[i] = v;
          return dot(r, seq_logits(q, w, Mode::kInfer, nullptr));
        },
        *const_cast<SequenceLearner<double>&>(base).params()[i], 1e-6);
    EXPECT_LT(max_relative_error(analytic, numeric), 1e-4) << i;
  }
}

// --- training ----------------------------------------------------------------------

TEST(TrainCnn, LossFallsAndBestCheckpointReturned) {
  const auto data = short_synth(5, 80, 31);
  const std::vector<EpochRecording> train(data.begin(), data.begin() + 3), val(data.begin() + 3, data.end());
  auto m = build_morpheus<float>(short_epoch_config(), 1);
  TrainConfig cfg;
  cfg.cnn.batch = 32;
  cfg.cnn.epochs = 4;
  History hist;
  const auto res = train_cnn(m, train, val, cfg.cnn, cfg, nullptr, &hist);
  ASSERT_EQ(res.val_accuracy.size(), 4u);
  ASSERT_EQ(hist.size(), 4u);
  EXPECT_LT(res.train_loss.back(), res.train_loss.front());
  const double best = *std::max_element(res.val_accuracy.begin(), res.val_accuracy.end());
  EXPECT_EQ(res.best_val_accuracy, best);
  EXPECT_GE(res.best_val_accuracy, res.val_accuracy.back());
  EXPECT_DOUBLE_EQ(cnn_accuracy(m, val), best);
  EXPECT_EQ(history_csv(hist).substr(0, 36), "phase,epoch,train_loss,val_accuracy\n");
}

TEST(TrainCnn, EmptySetsRejected) {
  auto m = build_morpheus<float>(short_epoch_config(), 1);
  const auto data = short_synth(2, 4, 1);
  TrainConfig cfg;
  EXPECT_THROW(train_cnn(m, {}, data, cfg.cnn, cfg), ValueError);
  EXPECT_THROW(train_cnn(m, data, {}, cfg.cnn, cfg), ValueError);
}

TEST(TrainCnn, DivergenceReportsEpoch) {
  const auto data = short_synth(2, 20, 3);
  auto m = build_morpheus<float>(short_epoch_config(), 1);
  m.head.weight.fill(std::numeric_limits<float>::quiet_NaN());
  TrainConfig cfg;
  cfg.cnn.batch = 8;
  try {
    train_cnn(m, std::span(data).first(1), std::span(data).last(1), cfg.cnn, cfg);
    FAIL();
  } catch (const NumericError& e) {
    EXPECT_EQ(e.step(), 1u);
  }
}

TEST(SequenceData, WindowCounts) {
  const auto data = short_synth(2, 20, 4);
  std::vector<EpochRecording> recs = {data[0], data[1]};
  recs[1].stages.resize(11);
  recs[1].samples.resize(11 * 300);
  std::vector<Tensor<float>> probs;
  Rng rng(1);
  for (const auto& r : recs) {
    Tensor<float> p(Shape{r.size(), 5});
    fill_uniform(p, rng, 0, 1);
    probs.push_back(p);
  }
  const auto samples = make_sequence_dataset(probs, recs, 12);
  ASSERT_EQ(samples.size(), 9u);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    EXPECT_EQ(samples[i].label, recs[0].stages[11 + i]);
    for (std::size_t j = 0; j < 12; ++j)
      for (std::size_t k = 0; k < 5; ++k) EXPECT_EQ(samples[i].window(j, k), probs[0](i + j, k));
  }
  EXPECT_TRUE(make_sequence_dataset(std::span(probs).last(1), std::span(recs).last(1), 12).empty());
}

TEST(SequenceData, CausalWindowPadsWithFirstRow) {
  Tensor<float> p(Shape{3, 2}, {1, 2, 3, 4, 5, 6});
  const auto w = causal_window(p, 1, 4);
  EXPECT_EQ(w.values()[0], 1);
  EXPECT_EQ(w.values()[2], 1);
  EXPECT_EQ(w.values()[4], 1);
  EXPECT_EQ(w.values()[6], 3);
}

namespace {

// Sequences whose label is recoverable only from the preceding step.
std::vector<SeqSample> lagged_samples(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<SeqSample> out;
  for (std::size_t i = 0; i < n; ++i) {
    SeqSample s{Tensor<float>(Shape{4, 5}), 0};
    for (std::size_t t = 0; t < 4; ++t) s.window(t, rng.index(5)) = 1.0f;
    s.label = static_cast<int>(argmax(std::span<const float>(s.window.data() + 10, 5)));
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace

TEST(TrainSequence, LearnsAndIsDeterministic) {
  const auto train = lagged_samples(400, 1), val = lagged_samples(100, 2);
  const auto cfg_model = short_epoch_config();
  TrainConfig cfg;
  cfg.seq = {1e-2, 32, 8};
  Rng rng(3);
  const auto init = build_sequence_learner<float>(cfg_model, rng);
  auto a = init, b = init;
  const auto ra = train_sequence_learner(a, train, val, cfg.seq, cfg);
  const auto rb = train_sequence_learner(b, train, val, cfg.seq, cfg);
  EXPECT_LT(ra.train_loss.back(), ra.train_loss.front());
  EXPECT_GT(ra.best_val_accuracy, 0.8);
  EXPECT_EQ(ra.val_accuracy, rb.val_accuracy);
  EXPECT_EQ(a.output.weight, b.output.weight);
  EXPECT_THROW(train_sequence_learner(a, {}, val, cfg.seq, cfg), ValueError);
}

// --- streaming ------------------------------------------------------------------------

TEST(Stream, MatchesReplayAndIsCausal) {
  const auto data = short_synth(1, 15, 5);
  const auto m = build_morpheus<float>(short_epoch_config(), 11);
  auto stream = StreamPredictor::from_model(m);
  std::vector<int> live;
  std::vector<Tensor<float>> probs;
  for (std::size_t e = 0; e < data[0].size(); ++e) {
    const auto out = stream.push(data[0].epoch(e));
    live.push_back(out.stage);
    probs.push_back(out.probabilities);
    double s = 0;
    for (const float v : out.probabilities.values()) s += v;
    EXPECT_NEAR(s, 1.0, 1e-5);
  }
  EXPECT_EQ(live, full_predict(m, data));
  // Feeding the same stream again, and a truncated stream.
  auto again = StreamPredictor::from_model(m);
  for (std::size_t e = 0; e < 6; ++e) EXPECT_EQ(again.push(data[0].epoch(e)).probabilities, probs[e]);
}

TEST(Stream, MalformedEpochKeepsPosition) {
  const auto data = short_synth(1, 3, 5);
  const auto m = build_morpheus<float>(short_epoch_config(), 11);
  auto stream = StreamPredictor::from_model(m);
  stream.push(data[0].epoch(0));
  const std::vector<float> bad(299, 0.0f);
  EXPECT_THROW(stream.push(bad), ShapeError);
  std::vector<float> nan(300, 0.0f);
  nan[4] = std::nanf("");
  EXPECT_THROW(stream.push(nan), ValueError);
  EXPECT_EQ(stream.position(), 1u);
  auto ref = StreamPredictor::from_model(m);
  ref.push(data[0].epoch(0));
  EXPECT_EQ(stream.push(data[0].epoch(1)).probabilities, ref.push(data[0].epoch(1)).probabilities);
}

// --- metrics --------------------------------------------------------------------------

TEST(Metrics, PerfectPredictions) {
  const std::vector<int> y = {0, 1, 2, 3, 4, 2, 2};
  const auto r = evaluate_metrics(y, y);
  EXPECT_EQ(r.accuracy, 1.0);
  EXPECT_EQ(r.mf1, 1.0);
  EXPECT_EQ(r.sensitivity, 1.0);
  EXPECT_EQ(r.specificity, 1.0);
}

TEST(Metrics, TwoClassHandExample) {
  // confusion [[2,0],[1,1]]: rows are true classes.
  const std::vector<int> labels = {0, 0, 1, 1}, pred = {0, 0, 0, 1};
  const auto r = evaluate_metrics(pred, labels, 2);
  EXPECT_EQ(r.confusion, (std::vector<std::vector<std::size_t>>{{2, 0}, {1, 1}}));
  EXPECT_DOUBLE_EQ(r.accuracy, 0.75);
  EXPECT_DOUBLE_EQ(r.sensitivity, 0.75);
  EXPECT_DOUBLE_EQ(r.specificity, 0.75);
  // F1: class 0 = 2*(2/3)*1/(2/3+1) = 0.8; class 1 = 2*1*0.5/1.5 = 2/3.
  EXPECT_DOUBLE_EQ(r.mf1, (0.8 + 2.0 / 3.0) / 2);
}

TEST(Metrics, SingleClassPredictionsAtChance) {
  std::vector<int> labels;
  for (int k = 0; k < 5; ++k) labels.insert(labels.end(), 20, k);
  const std::vector<int> pred(labels.size(), 2);
  EXPECT_DOUBLE_EQ(evaluate_metrics(pred, labels).accuracy, 0.2);
}

TEST(Metrics, MacroAveragesMatchPerClassOracle) {
  Rng rng(12);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<int> labels(200), pred(200);
    for (std::size_t i = 0; i < 200; ++i) {
      labels[i] = static_cast<int>(rng.index(4));  // class 4 absent
      pred[i] = rng.bernoulli(0.6) ? labels[i] : static_cast<int>(rng.index(5));
    }
    const auto r = evaluate_metrics(pred, labels);
    double f1 = 0, sens = 0, spec = 0;
    for (int c = 0; c < 4; ++c) {
      double tp = 0, fp = 0, fn = 0, tn = 0;
      for (std::size_t i = 0; i < 200; ++i) {
        const bool t = labels[i] == c, p = pred[i] == c;
        tp += t && p;
        fp += !t && p;
        fn += t && !p;
        tn += !t && !p;
      }
      const double prec = tp / (tp + fp), rec = tp / (tp + fn);
      f1 += 2 * prec * rec / (prec + rec);
      sens += rec;
      spec += tn / (tn + fp);
    }
    EXPECT_NEAR(r.mf1, f1 / 4, 1e-12);
    EXPECT_NEAR(r.sensitivity, sens / 4, 1e-12);
    EXPECT_NEAR(r.specificity, spec / 4, 1e-12);
    std::size_t sum = 0;
    for (const auto& row : r.confusion)
      for (const auto v : row) sum += v;
    EXPECT_EQ(sum, 200u);
  }
}

TEST(Metrics, LengthMismatch) {
  const std::vector<int> a = {0, 1}, b = {0};
  EXPECT_THROW(evaluate_metrics(a, b), ShapeError);
}

// --- checkpoints ----------------------------------------------------------------------

TEST(Checkpoint, RoundTripPreservesOutputs) {
  auto m = build_morpheus<float>(MorpheusConfig::defaults(), 13);
  m.blocks[0].bn.running_mean.fill(0.25f);
  KeyValues meta;
  meta.set("note", "trained");
  const auto bytes = save_checkpoint(m, meta);
  EXPECT_LE(bytes.size(), 120u * 1024u);
  const auto ck = load_checkpoint(bytes);
  EXPECT_EQ(ck.meta.get("note"), "trained");
  EXPECT_EQ(ck.model.config, m.config);
  Rng rng(13);
  Tensor<float> x(Shape{3000});
  fill_uniform(x, rng, -1, 1);
  EXPECT_EQ(cnn_forward(ck.model, x), cnn_forward(m, x));
  EXPECT_EQ(ck.model.seq.lstm.weight, m.seq.lstm.weight);
  EXPECT_EQ(save_checkpoint(ck.model, ck.meta), bytes);
}

TEST(Checkpoint, DefaultFloatModelWithinContainerTarget) {
  const auto bytes = save_checkpoint(build_morpheus<float>(MorpheusConfig::defaults(), 1));
  EXPECT_GT(bytes.size(), 19034u * 4);
  EXPECT_LE(bytes.size(), 120u * 1024);
}

TEST(Checkpoint, FoldedModelRoundTrips) {
  const auto m = fold_model(build_morpheus<float>(tiny_config(), 14));
  const auto ck = load_checkpoint(save_checkpoint(m));
  EXPECT_TRUE(ck.model.folded);
  EXPECT_EQ(ck.model.blocks[0].conv.weight, m.blocks[0].conv.weight);
}

TEST(Checkpoint, CorruptionDetected) {
  auto bytes = save_checkpoint(build_morpheus<float>(tiny_config(), 15));
  bytes[bytes.size() / 2] ^= 0x40;
  EXPECT_THROW(load_checkpoint(bytes), ParseError);
  EXPECT_THROW(load_checkpoint(std::span(bytes).first(3)), ParseError);
}
