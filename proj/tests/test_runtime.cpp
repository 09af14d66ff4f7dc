// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The MorpheusNet Authors

#include <gtest/gtest.h>

#include <atomic>
#include <cstdlib>
#include <new>
#include <numeric>

#include "morpheus/data/synth.hpp"
#include "morpheus/runtime/profile.hpp"
#include "support/int_sim.hpp"

// Heap acquisitions are counted process-wide so tests can assert that
// inference performs none.
namespace {
std::atomic<std::size_t> g_allocations{0};
}

void* operator new(std::size_t n) {
  ++g_allocations;
  if (void* p = std::malloc(n ? n : 1)) return p;
  throw std::bad_alloc();
}
void operator delete(void* p) noexcept { std::free(p); }
void operator delete(void* p, std::size_t) noexcept { std::free(p); }

using namespace morpheus;
using namespace morpheus::runtime;

namespace {

MorpheusConfig small_config() {
  MorpheusConfig c;
  c.input_len = 300;
  c.layers = {LayerSpec::start(8, 16, 4), LayerSpec::conv_block(16, 8), LayerSpec::pooling(PoolKind::kAvg, 4),
              LayerSpec::identity_block(16, 8)};
  c.sequence_len = 4;
  return c;
}

std::vector<EpochRecording> synth_for(const MorpheusConfig& cfg, std::size_t subjects, std::size_t epochs,
                                      std::uint64_t seed) {
  SynthOptions o;
  o.epoch_len = cfg.input_len;
  return synth_dataset(subjects, epochs, seed, o);
}

// Untrained but fully populated quantized model: random biases so every
// integer bias path is exercised, ranges calibrated on synthetic epochs.
QuantizedModel quick_quantized(const MorpheusConfig& cfg, const QuantizationPlan& plan, std::uint64_t seed) {
  auto m = build_morpheus<float>(cfg, seed);
  Rng rng(seed + 100);
  for (auto& b : m.blocks) {
    for (auto* t : {&b.conv.bias, &b.sep.bias, &b.residual.bias}) fill_uniform(*t, rng, -0.2, 0.2);
    if (b.has_bn()) {
      fill_uniform(b.bn.running_mean, rng, -0.1, 0.1);
      fill_uniform(b.bn.running_var, rng, 0.5, 2.0);
    }
  }
  fill_uniform(m.head.bias, rng, -0.2, 0.2);
  auto f = fold_model(m);
  const auto cal = calibrate_ranges(f, sample_epochs(synth_for(cfg, 2, 16, seed), 32, 1), plan);
  freeze_weights_to_int8(f, cal.sim);
  return {f, cal.sim, plan, cal.rows};
}

Tensor<float> random_epochs(std::size_t n, std::size_t len, std::uint64_t seed) {
  Rng rng(seed);
  Tensor<float> x(Shape{n, 1, len});
  for (auto& v : x.values()) v = static_cast<float>(rng.normal() * 1.5);
  return x;
}

std::span<const float> row(const Tensor<float>& x, std::size_t i, std::size_t len) {
  return {x.data() + i * len, len};
}

// Compares the engine against the scalar reference at every layer output.
void expect_bit_exact(const FlatModel& fm, std::size_t inputs, std::uint64_t seed) {
  Engine e(fm);
  std::vector<std::vector<std::int8_t>> got_i8(fm.layers.size());
  std::vector<std::vector<float>> got_f(fm.layers.size());
  e.set_observer([&](std::size_t i, const TensorView& v) {
    got_i8[i].assign(v.int8_values().begin(), v.int8_values().end());
    got_f[i].assign(v.float_values().begin(), v.float_values().end());
  });
  const auto x = random_epochs(inputs, fm.input_len, seed);
  std::size_t int_boundaries = 0;
  for (std::size_t n = 0; n < inputs; ++n) {
    const auto probs = e.infer(row(x, n, fm.input_len));
    const auto ref = oracle::simulate_flat(fm, row(x, n, fm.input_len));
    for (std::size_t i = 0; i < fm.layers.size(); ++i) {
      const auto& r = ref[i + 1];
      if (r.int8) {
        ++int_boundaries;
        ASSERT_EQ(got_i8[i].size(), r.q.size());
        for (std::size_t j = 0; j < r.q.size(); ++j)
          ASSERT_EQ(got_i8[i][j], r.q[j]) << "input " << n << " layer " << fm.layers[i].name << " element " << j;
      } else {
        ASSERT_EQ(got_f[i], r.f) << "input " << n << " layer " << fm.layers[i].name;
      }
    }
    ASSERT_EQ(std::vector<float>(probs.begin(), probs.end()), ref.back().f);
  }
  EXPECT_GT(int_boundaries, 0u);
}

}  // namespace

// --- integer kernels ---------------------------------------------------------------

// input [1.0, -0.5] -> QUANT(0.5, 0) -> CONV 1x1 (1 -> 2) -> POINTWISE (2 -> 1) -> GAP -> DENSE -> SOFTMAX
TEST(IntegerKernels, PointwiseHandExample) {
  FlatModel fm;
  fm.input_len = 2;
  fm.classes = 1;
  fm.sequence_len = 1;
  fm.lstm_hidden = 1;
  fm.dense_hidden = 1;
  fm.sequence.assign(fm.sequence_floats(), 0.0f);
  auto put = [&](auto values) {
    while (fm.blob.size() % 4) fm.blob.push_back(0);
    const auto off = static_cast<std::uint32_t>(fm.blob.size());
    const auto* p = reinterpret_cast<const std::uint8_t*>(values.data());
    fm.blob.insert(fm.blob.end(), p, p + values.size() * sizeof(values[0]));
    return std::pair{off, static_cast<std::uint32_t>(values.size() * sizeof(values[0]))};
  };
  const RequantMultiplier one = requant_multiplier(1.0), quarter = requant_multiplier(0.25);
  FlatLayer quant{OpKind::kQuant, false, false, "q", {0}, 1, 2, 0, {0.5, 0}};
  FlatLayer conv{OpKind::kConv, true, false, "conv", {1}, 2, 2, 1, {1.0, 1}, one};
  conv.weight_scale = 1;
  std::tie(conv.weight_offset, conv.weight_bytes) = put(std::vector<std::int8_t>{3, -2});
  std::tie(conv.bias_offset, conv.bias_bytes) = put(std::vector<std::int32_t>{0, 4});
  FlatLayer pw{OpKind::kPointwise, true, false, "pw", {2}, 1, 2, 1, {1.0, -3}, quarter};
  pw.weight_scale = 1;
  std::tie(pw.weight_offset, pw.weight_bytes) = put(std::vector<std::int8_t>{5, -7});
  std::tie(pw.bias_offset, pw.bias_bytes) = put(std::vector<std::int32_t>{10});
  FlatLayer gap{OpKind::kGlobalAvgPool, false, false, "gap", {3}, 1, 1, 0, {1.0, -3}};
  FlatLayer head{OpKind::kDense, true, false, "head", {4}, 1, 1, 0};
  head.weight_scale = 1;
  std::tie(head.weight_offset, head.weight_bytes) = put(std::vector<std::int8_t>{1});
  std::tie(head.bias_offset, head.bias_bytes) = put(std::vector<std::int32_t>{0});
  FlatLayer sm{OpKind::kSoftmax, false, false, "softmax", {5}, 1, 1, 0};
  fm.layers = {quant, conv, pw, gap, head, sm};

  Engine e(fm);
  std::vector<std::vector<std::int8_t>> out(fm.layers.size());
  e.set_observer([&](std::size_t i, const TensorView& v) { out[i].assign(v.int8_values().begin(), v.int8_values().end()); });
  const std::vector<float> x{1.0f, -0.5f};
  e.infer(x);
  // q = [2, -1]; conv: c0 = 3q + 0, c1 = -2q + 4, plus zero point 1.
  EXPECT_EQ(out[0], (std::vector<std::int8_t>{2, -1}));
  EXPECT_EQ(out[1], (std::vector<std::int8_t>{7, -2, 1, 7}));
  // acc = 10 + 5*(c0 - 1) - 7*(c1 - 1): t0 = 40, t1 = -47; x0.25 -> 10, -11.75 -> -12; zero point -3.
  EXPECT_EQ(out[2], (std::vector<std::int8_t>{7, -15}));
  // mean of (q + 3) = (10 - 12) / 2 = -1 -> -4.
  EXPECT_EQ(out[3], (std::vector<std::int8_t>{-4}));
}

TEST(IntegerKernels, SaturatesAndRectifies) {
  auto q = quick_quantized(small_config(), QuantizationPlan::all(small_config()), 5);
  const auto fm = build_flat_model(q);
  Engine e(fm);
  bool checked = false;
  e.set_observer([&](std::size_t i, const TensorView& v) {
    const auto& l = fm.layers[i];
    if (!l.relu || !l.quantized) return;
    for (const auto s : v.int8_values()) ASSERT_GE(s, l.out.zero_point) << l.name;
    checked = true;
  });
  const auto x = random_epochs(1, 300, 1);
  e.infer(row(x, 0, 300));
  EXPECT_TRUE(checked);
}

// --- bit exactness -----------------------------------------------------------------

TEST(BitExact, AllLayersQuantized) {
  expect_bit_exact(build_flat_model(quick_quantized(small_config(), QuantizationPlan::all(small_config()), 1)), 100, 11);
}

TEST(BitExact, StartAndIdentityKeptFloat) {
  const auto cfg = small_config();
  const auto fm = build_flat_model(quick_quantized(cfg, QuantizationPlan::start_identity_excluded(cfg), 2));
  EXPECT_EQ(fm.layers.front().kind, OpKind::kConv);  // float start reads float samples
  EXPECT_FALSE(fm.layers.front().quantized);
  expect_bit_exact(fm, 100, 12);
}

TEST(BitExact, FloatHead) {
  const auto cfg = small_config();
  expect_bit_exact(build_flat_model(quick_quantized(cfg, QuantizationPlan::keeping_float(cfg, {"head", "conv_block_1"}), 3)),
                   30, 13);
}

TEST(BitExact, SearchedLayoutWithoutLeadingStartBlock) {
  MorpheusConfig cfg;
  cfg.input_len = 300;
  cfg.layers = {LayerSpec::conv_block(8, 8), LayerSpec::pooling(PoolKind::kMax, 4), LayerSpec::start(8, 4, 0),
                LayerSpec::identity_block(8, 8)};
  cfg.sequence_len = 4;
  for (const auto& plan : {QuantizationPlan::all(cfg), QuantizationPlan::start_identity_excluded(cfg)}) {
    const auto fm = build_flat_model(quick_quantized(cfg, plan, 5));
    EXPECT_EQ(fm.layers.front().kind, OpKind::kQuant);
    expect_bit_exact(fm, 30, 15);
  }
}

TEST(BitExact, DefaultModel) {
  const auto cfg = MorpheusConfig::defaults();
  expect_bit_exact(build_flat_model(quick_quantized(cfg, QuantizationPlan::all(cfg), 4)), 10, 14);
}

TEST(Engine, DeterministicAndValidatesInput) {
  Engine e(build_flat_model(quick_quantized(small_config(), QuantizationPlan::all(small_config()), 1)));
  const auto x = random_epochs(1, 300, 3);
  const auto first = e.infer(row(x, 0, 300));
  const std::vector<float> a(first.begin(), first.end());
  const auto p = e.infer(row(x, 0, 300));
  EXPECT_EQ(a, std::vector<float>(p.begin(), p.end()));
  EXPECT_NEAR(std::accumulate(p.begin(), p.end(), 0.0), 1.0, 1e-5);
  const std::vector<float> short_epoch(299, 0.0f);
  EXPECT_THROW(e.infer(short_epoch), ShapeError);
  std::vector<float> bad(300, 0.0f);
  bad[7] = std::numeric_limits<float>::quiet_NaN();
  EXPECT_THROW(e.infer(bad), ValueError);
}

TEST(Engine, NoAllocationDuringInference) {
  const auto cfg = MorpheusConfig::defaults();
  StreamEngine s(build_flat_model(quick_quantized(cfg, QuantizationPlan::start_identity_excluded(cfg), 1)));
  const auto acquired = s.engine().buffer_acquisitions();
  const auto x = random_epochs(3, cfg.input_len, 4);
  s.push(row(x, 0, cfg.input_len));
  const std::size_t before = g_allocations.load();
  for (std::size_t i = 0; i < 3; ++i) {
    s.engine().infer(row(x, i, cfg.input_len));
    s.push(row(x, i, cfg.input_len));
  }
  EXPECT_EQ(g_allocations.load() - before, 0u);
  EXPECT_EQ(s.engine().buffer_acquisitions(), acquired);
  EXPECT_EQ(acquired, 1u);
}

TEST(Engine, TracksFloatModelAfterFinetuning) {
  const auto cfg = small_config();
  const auto data = synth_for(cfg, 5, 60, 21);
  const std::vector<EpochRecording> train(data.begin(), data.begin() + 3), val(data.begin() + 3, data.begin() + 4),
      test(data.begin() + 4, data.end());
  auto m = build_morpheus<float>(cfg, 2);
  TrainConfig tc;
  tc.cnn = {1e-3, 32, 3};
  train_cnn(m, train, val, tc.cnn, tc);
  for (const auto& plan : {QuantizationPlan::all(cfg), QuantizationPlan::start_identity_excluded(cfg)}) {
    QatConfig qc;
    qc.cnn.batch = 32;
    const auto q = qat_finetune_cnn(m, plan, train, val, qc).quantized;
    Engine e(build_flat_model(q));
    const auto x = sample_epochs(test, 60, 3);
    const auto ref = cnn_probabilities(q.model, x, nullptr);
    double worst = 0;
    for (std::size_t n = 0; n < x.dim(0); ++n) {
      const auto p = e.infer(row(x, n, cfg.input_len));
      for (std::size_t k = 0; k < p.size(); ++k) worst = std::max(worst, std::abs(double(p[k]) - ref[n * 5 + k]));
    }
    EXPECT_LE(worst, 0.05);
  }
}

// --- flat model container --------------------------------------------------------------

TEST(FlatModelFile, DefaultModelWithinBudget) {
  const auto cfg = MorpheusConfig::defaults();
  for (const auto& plan : {QuantizationPlan::all(cfg), QuantizationPlan::start_identity_excluded(cfg)}) {
    const auto bytes = compile_flat_model(quick_quantized(cfg, plan, 1));
    EXPECT_LE(bytes.size(), kFlatModelBudget);
  }
}

TEST(FlatModelFile, DeterministicAndRoundTrips) {
  const auto q = quick_quantized(small_config(), QuantizationPlan::start_identity_excluded(small_config()), 1);
  const auto a = compile_flat_model(q), b = compile_flat_model(q);
  EXPECT_EQ(a, b);
  const auto fm = FlatModel::from_bytes(a);
  EXPECT_EQ(fm.to_bytes(), a);
  Engine e(FlatModel::from_bytes(a));
  EXPECT_EQ(e.model().to_bytes(), a);
}

TEST(FlatModelFile, CorruptionDetected) {
  const auto bytes = compile_flat_model(quick_quantized(small_config(), QuantizationPlan::all(small_config()), 1));
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    auto c = bytes;
    c[4 + rng.index(c.size() - 4)] ^= static_cast<std::uint8_t>(1 + rng.index(255));
    EXPECT_THROW(FlatModel::from_bytes(c), Error);
  }
  auto wrong = bytes;
  wrong[3] = '2';
  try {
    FlatModel::from_bytes(wrong);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("MNQ1"), std::string::npos);
  }
  auto version = bytes;
  version[4] = 9;
  EXPECT_THROW(FlatModel::from_bytes(version), ParseError);
}

TEST(FlatModelFile, TruncationReportsOffset) {
  const auto bytes = compile_flat_model(quick_quantized(small_config(), QuantizationPlan::all(small_config()), 1));
  const auto fm = FlatModel::from_bytes(bytes);
  // Cut inside the weight blob.
  const std::size_t blob_end = bytes.size() - 4 - fm.sequence.size() * 4;
  const std::size_t cut = blob_end - fm.blob.size() / 2;
  try {
    FlatModel::from_bytes(std::span(bytes).first(cut));
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.offset(), blob_end - fm.blob.size());
    EXPECT_NE(std::string(e.what()).find("weight blob"), std::string::npos);
  }
  for (std::size_t n = 0; n < bytes.size(); n += 97) EXPECT_THROW(FlatModel::from_bytes(std::span(bytes).first(n)), Error);
}

TEST(FlatModelFile, RejectsUnfoldedOrOversizedModels) {
  auto q = quick_quantized(small_config(), QuantizationPlan::all(small_config()), 1);
  EXPECT_THROW(compile_flat_model(q, 1000), ValueError);
  q.model.folded = false;
  EXPECT_THROW(build_flat_model(q), ValueError);
}

TEST(FlatModelFile, SequenceLearnerCarriedInFloat) {
  const auto q = quick_quantized(small_config(), QuantizationPlan::all(small_config()), 1);
  const auto s = flat_sequence_learner(build_flat_model(q));
  EXPECT_EQ(s.lstm.weight, q.model.seq.lstm.weight);
  EXPECT_EQ(s.output.bias, q.model.seq.output.bias);
}

// --- memory planning ---------------------------------------------------------------------

namespace {

// Brute-force peak: sum of sizes of tensors alive at each program point.
std::size_t brute_peak(const std::vector<std::size_t>& bytes, const std::vector<std::vector<std::size_t>>& ops) {
  const std::size_t n = bytes.size();
  std::vector<std::size_t> last(n);
  for (std::size_t t = 0; t < n; ++t) last[t] = t;
  for (std::size_t i = 0; i < ops.size(); ++i)
    for (auto in : ops[i]) last[in] = std::max(last[in], i + 1);
  last[n - 1] = n;
  std::size_t peak = 0;
  for (std::size_t time = 0; time <= n; ++time) {
    std::size_t live = 0;
    for (std::size_t t = 0; t < n; ++t)
      if (t <= time && time <= last[t]) live += bytes[t];
    peak = std::max(peak, live);
  }
  return peak;
}

void expect_valid_plan(const ArenaPlan& p) {
  for (std::size_t a = 0; a < p.tensor_bytes.size(); ++a) {
    EXPECT_GE(p.buffer_bytes[p.assignment[a]], p.tensor_bytes[a]);
    for (std::size_t b = a + 1; b < p.tensor_bytes.size(); ++b)
      if (p.overlaps(a, b)) EXPECT_NE(p.assignment[a], p.assignment[b]) << a << " " << b;
  }
  EXPECT_GE(p.arena_bytes, p.peak_live_bytes);
}

}  // namespace

TEST(ArenaPlanner, TwoLayerChain) {
  const std::vector<std::size_t> bytes{8, 400, 96};  // input, A, B
  const std::vector<std::vector<std::size_t>> ops{{0}, {1}};
  const auto p = plan_memory(bytes, ops);
  EXPECT_EQ(p.peak_live_bytes, 400u + 96u);
  expect_valid_plan(p);
}

TEST(ArenaPlanner, ChainPingPongs) {
  const std::vector<std::size_t> bytes{64, 64, 64, 64, 64, 64};
  const std::vector<std::vector<std::size_t>> ops{{0}, {1}, {2}, {3}, {4}};
  const auto p = plan_memory(bytes, ops);
  EXPECT_EQ(p.buffer_bytes.size(), 2u);
  EXPECT_EQ(p.arena_bytes, 128u);
  expect_valid_plan(p);
}

TEST(ArenaPlanner, ResidualInputStaysLive) {
  // input -> x; x -> depthwise -> pointwise; add(pointwise, x)
  const std::vector<std::size_t> bytes{16, 100, 100, 100, 100};
  const std::vector<std::vector<std::size_t>> ops{{0}, {1}, {2}, {3, 1}};
  const auto p = plan_memory(bytes, ops);
  EXPECT_EQ(p.last_use[1], 4u);
  EXPECT_EQ(p.peak_live_bytes, 300u);  // x, branch and sum at the add
  expect_valid_plan(p);
}

TEST(ArenaPlanner, RandomProgramsMatchBruteForce) {
  Rng rng(9);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n_ops = 1 + rng.index(12);
    std::vector<std::size_t> bytes(n_ops + 1);
    for (auto& b : bytes) b = 1 + rng.index(500);
    std::vector<std::vector<std::size_t>> ops(n_ops);
    for (std::size_t i = 0; i < n_ops; ++i) {
      ops[i].push_back(i);
      if (rng.uniform() < 0.3) ops[i].push_back(rng.index(i + 1));
    }
    const auto p = plan_memory(bytes, ops);
    EXPECT_EQ(p.peak_live_bytes, brute_peak(bytes, ops));
    expect_valid_plan(p);
    const auto again = plan_memory(bytes, ops);
    EXPECT_EQ(again.assignment, p.assignment);
    EXPECT_EQ(again.buffer_bytes, p.buffer_bytes);
  }
}

TEST(ArenaPlanner, EngineArenaCoversLiveTensors) {
  Engine e(build_flat_model(quick_quantized(MorpheusConfig::defaults(), QuantizationPlan::all(MorpheusConfig::defaults()), 1)));
  expect_valid_plan(e.plan());
}

// --- profiling ------------------------------------------------------------------------

TEST(Profile, AnalyticMacCounts) {
  const auto cfg = MorpheusConfig::defaults();
  const auto fm = build_flat_model(quick_quantized(cfg, QuantizationPlan::all(cfg), 1));
  const auto macs = layer_macs(fm);
  auto find = [&](const std::string& name) {
    for (const auto& e : macs)
      if (e.layer == name) return e.macs;
    ADD_FAILURE() << name;
    return std::uint64_t{0};
  };
  EXPECT_EQ(find("conv_block_1.pointwise"), 16u * 32u * 750u);
  EXPECT_EQ(find("conv_block_1.pointwise"), 384000u);
  EXPECT_EQ(find("start.conv"), 16u * 1u * 32u * 3000u);
  EXPECT_EQ(find("conv_block_1.depthwise"), 16u * 8u * 750u);
  EXPECT_EQ(find("seq.output"), 160u);  // dense 32 -> 5
  EXPECT_EQ(find("head"), 64u * 5u);
  EXPECT_EQ(find("seq.lstm"), 12u * 4u * 32u * (5u + 32u));
}

TEST(Profile, ReportTotalsAndJson) {
  const auto cfg = small_config();
  const auto bytes = compile_flat_model(quick_quantized(cfg, QuantizationPlan::all(cfg), 1));
  auto s = StreamEngine::from_bytes(bytes);
  const auto r = profile(s, random_epochs(4, cfg.input_len, 1), 25, bytes.size());
  std::uint64_t sum = 0;
  for (const auto& e : r.macs_per_layer) sum += e.macs;
  EXPECT_EQ(r.macs_total, sum);
  EXPECT_EQ(r.latencies_ms.size(), 25u);
  EXPECT_LE(r.latency_ms_median, r.latency_ms_p95);
  EXPECT_EQ(r.model_bytes, bytes.size());
  const auto j = r.to_json();
  std::vector<std::string> keys;
  for (auto it = j.begin(); it != j.end(); ++it) keys.push_back(it.key());
  EXPECT_EQ(keys, (std::vector<std::string>{"macs_total", "macs_per_layer", "peak_arena_bytes", "model_bytes",
                                            "latency_ms_median", "latency_ms_p95"}));
  EXPECT_THROW(profile(s, random_epochs(1, cfg.input_len, 1), 0, 1), ValueError);
}

TEST(Profile, PercentileDefinitions) {
  EXPECT_EQ(median_of({3, 1, 2}), 2);
  EXPECT_EQ(median_of({4, 1, 2, 3}), 2.5);
  std::vector<double> v(100);
  std::iota(v.begin(), v.end(), 1.0);
  EXPECT_EQ(percentile_of(v, 95), 95);
  EXPECT_EQ(percentile_of({7}, 95), 7);
}

// --- full pipeline streaming ----------------------------------------------------------

TEST(InferFull, MatchesOfflinePipeline) {
  const auto cfg = small_config();
  const auto fm = build_flat_model(quick_quantized(cfg, QuantizationPlan::start_identity_excluded(cfg), 6));
  StreamEngine s(fm);
  const auto rec = synth_for(cfg, 1, 15, 8).front();
  Tensor<float> epochs(Shape{rec.size(), 1, cfg.input_len}, rec.samples);
  const auto online = infer_full(s, epochs);
  ASSERT_EQ(online.size(), rec.size());
  // Offline: CNN table first, then causal windows through the float learner.
  Engine e(fm);
  Tensor<float> table(Shape{rec.size(), cfg.classes});
  for (std::size_t i = 0; i < rec.size(); ++i) {
    const auto p = e.infer(rec.epoch(i));
    std::copy(p.begin(), p.end(), table.data() + i * cfg.classes);
  }
  const auto seq = flat_sequence_learner(fm);
  for (std::size_t i = 0; i < rec.size(); ++i) {
    const auto probs = seq_probabilities(seq, causal_window(table, i, cfg.sequence_len));
    EXPECT_EQ(online[i].stage, static_cast<int>(argmax(probs.values()))) << i;
    for (std::size_t k = 0; k < cfg.classes; ++k) {
      EXPECT_EQ(online[i].cnn_probabilities[k], table[i * cfg.classes + k]);
      EXPECT_NEAR(online[i].probabilities[k], probs[k], 1e-6);
    }
  }
  EXPECT_EQ(infer_full(s, epochs).back().probabilities, online.back().probabilities);
}

TEST(InferFull, FirstEpochAndMalformedChunk) {
  const auto cfg = small_config();
  StreamEngine s(build_flat_model(quick_quantized(cfg, QuantizationPlan::all(cfg), 6)));
  const auto x = random_epochs(3, cfg.input_len, 2);
  const auto first = s.push(row(x, 0, cfg.input_len));
  EXPECT_EQ(first.probabilities.size(), cfg.classes);
  s.push(row(x, 1, cfg.input_len));
  const std::vector<float> bad(cfg.input_len - 1, 0.0f);
  EXPECT_THROW(s.push(bad), ShapeError);
  EXPECT_EQ(s.position(), 2u);
  // The stream continues as if the bad chunk never arrived.
  const auto step = s.push(row(x, 2, cfg.input_len));
  const std::vector<float> third(step.probabilities.begin(), step.probabilities.end());
  StreamEngine fresh(build_flat_model(quick_quantized(cfg, QuantizationPlan::all(cfg), 6)));
  fresh.push(row(x, 0, cfg.input_len));
  fresh.push(row(x, 1, cfg.input_len));
  const auto expect = fresh.push(row(x, 2, cfg.input_len)).probabilities;
  EXPECT_EQ(third, std::vector<float>(expect.begin(), expect.end()));
}
