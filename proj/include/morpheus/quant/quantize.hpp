// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The MorpheusNet Authors

#pragma once

#include <algorithm>
#include <limits>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "morpheus/model/checkpoint.hpp"
#include "morpheus/model/train.hpp"
#include "morpheus/quant/qparams.hpp"

namespace morpheus {

inline constexpr std::size_t kDefaultCalibrationSamples = 256;
inline constexpr const char* kHeadLayer = "head";

/// Which CNN layers run in int8. Every conv-bearing block plus the
/// classifier head appears exactly once; pooling layers have no weights and
/// always run on their input's int8 grid, so they are not listed.
struct QuantizationPlan {
  std::vector<std::pair<std::string, bool>> layers;  // name, quantize
  std::size_t calibration_samples = kDefaultCalibrationSamples;

  static std::vector<std::string> layer_names(const MorpheusConfig& cfg) {
    std::vector<std::string> out;
    const auto names = block_names(cfg);
    for (std::size_t i = 0; i < names.size(); ++i)
      if (cfg.layers[i].kind != BlockKind::kPool) out.push_back(names[i]);
    out.emplace_back(kHeadLayer);
    return out;
  }

  static QuantizationPlan all(const MorpheusConfig& cfg) {
    QuantizationPlan p;
    for (auto& n : layer_names(cfg)) p.layers.emplace_back(std::move(n), true);
    return p;
  }

  static QuantizationPlan keeping_float(const MorpheusConfig& cfg, const std::vector<std::string>& keep) {
    auto p = all(cfg);
    for (const auto& k : keep) {
      auto it = std::find_if(p.layers.begin(), p.layers.end(), [&](const auto& e) { return e.first == k; });
      if (it == p.layers.end()) throw ValueError("plan: no layer named '" + k + "'");
      it->second = false;
    }
    return p;
  }

  /// Start block and every identity block kept in float.
  static QuantizationPlan start_identity_excluded(const MorpheusConfig& cfg) {
    std::vector<std::string> keep;
    const auto names = block_names(cfg);
    for (std::size_t i = 0; i < names.size(); ++i)
      if (cfg.layers[i].kind == BlockKind::kStart || cfg.layers[i].kind == BlockKind::kIdentityBlock)
        keep.push_back(names[i]);
    return keeping_float(cfg, keep);
  }

  bool quantizes(std::string_view name) const {
    for (const auto& [n, q] : layers)
      if (n == name) return q;
    throw ValueError("plan: no entry for layer '" + std::string(name) + "'");
  }

  void validate(const MorpheusConfig& cfg) const {
    if (calibration_samples == 0) throw ValueError("plan: calibration_samples must be positive");
    const auto expected = layer_names(cfg);
    std::set<std::string> seen;
    for (const auto& [n, q] : layers) {
      if (std::find(expected.begin(), expected.end(), n) == expected.end())
        throw ValueError("plan: unknown layer '" + n + "'");
      if (!seen.insert(n).second) throw ValueError("plan: layer '" + n + "' listed twice");
    }
    for (const auto& n : expected)
      if (!seen.count(n)) throw ValueError("plan: layer '" + n + "' missing");
  }

  std::string to_text() const {
    std::string out = "calibration_samples = " + std::to_string(calibration_samples) + "\n";
    for (const auto& [n, q] : layers) out += n + " = " + (q ? "quantize" : "keep_float") + "\n";
    return out;
  }

  static QuantizationPlan from_text(std::string_view text, const MorpheusConfig& cfg) {
    const auto kv = KeyValues::parse(text);
    QuantizationPlan p;
    for (const auto& [k, v] : kv.entries()) {
      if (k == "calibration_samples") {
        p.calibration_samples = KeyValues::to_number<std::size_t>(v, k);
        continue;
      }
      if (v != "quantize" && v != "keep_float")
        throw ValueError("plan: layer '" + k + "' must be 'quantize' or 'keep_float', got '" + v + "'");
      p.layers.emplace_back(k, v == "quantize");
    }
    // Keep model order regardless of file order.
    const auto order = layer_names(cfg);
    p.validate(cfg);
    std::stable_sort(p.layers.begin(), p.layers.end(), [&](const auto& a, const auto& b) {
      return std::find(order.begin(), order.end(), a.first) < std::find(order.begin(), order.end(), b.first);
    });
    return p;
  }
};

// ---------------------------------------------------------------------------
// Calibration

struct CalibrationRow {
  std::string point;  // "input" or "<layer>.<out|dw|branch|residual>"
  double min = 0;
  double max = 0;
  QuantParams q;
  bool floored = false;
};

struct Calibration {
  QuantSim sim;
  std::vector<CalibrationRow> rows;
};

inline std::string calibration_csv(std::span<const CalibrationRow> rows) {
  std::string out = "layer,min,max,scale,zero_point,floored\n";
  for (const auto& r : rows)
    out += r.point + "," + format_number(r.min) + "," + format_number(r.max) + "," + format_number(r.q.scale) + "," +
           std::to_string(r.q.zero_point) + "," + (r.floored ? "1" : "0") + "\n";
  return out;
}

namespace detail {

struct RangeTracker {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();

  void add(const Tensor<float>& t) {
    for (const float v : t.values()) {
      lo = std::min(lo, static_cast<double>(v));
      hi = std::max(hi, static_cast<double>(v));
    }
  }
};

}  // namespace detail

/// Activation ranges of a float CNN over `epochs` [N, 1, L]. Block outputs,
/// depthwise outputs, relu branches and residual projections each get an
/// asymmetric int8 mapping; pools reuse their input mapping. Block and head
/// quantization flags come from `plan`.
inline Calibration calibrate_ranges(const MorpheusModel<float>& model, const Tensor<float>& epochs,
                                    const QuantizationPlan& plan, std::size_t chunk = 32) {
  plan.validate(model.config);
  if (epochs.rank() != 3 || epochs.dim(0) == 0) throw ValueError("calibration needs at least one epoch");
  const std::size_t n = epochs.dim(0), L = epochs.dim(2);
  const std::size_t nb = model.blocks.size();
  detail::RangeTracker input;
  std::vector<std::map<std::string, detail::RangeTracker>> points(nb);
  auto& m = const_cast<MorpheusModel<float>&>(model);  // inference only
  for (std::size_t start = 0; start < n; start += chunk) {
    const std::size_t b = std::min(chunk, n - start);
    Tensor<float> x(Shape{b, 1, L}, std::vector<float>(epochs.data() + start * L, epochs.data() + (start + b) * L));
    input.add(x);
    CnnTrace<float> trace;
    cnn_logits(m, x, Mode::kInfer, nullptr, &trace);
    for (std::size_t i = 0; i < nb; ++i) {
      const auto& t = trace.blocks[i];
      switch (model.blocks[i].spec.kind) {
        case BlockKind::kPool: break;
        case BlockKind::kConvBlock: points[i]["residual"].add(t.r); [[fallthrough]];
        case BlockKind::kIdentityBlock:
          points[i]["dw"].add(t.dw);
          points[i]["branch"].add(t.a);
          [[fallthrough]];
        case BlockKind::kStart: points[i]["out"].add(t.s); break;
      }
    }
  }
  Calibration cal;
  auto make = [&](const std::string& name, const detail::RangeTracker& r) {
    const auto rp = asymmetric_params(r.lo, r.hi);
    cal.rows.push_back({name, r.lo, r.hi, rp.q, rp.floored});
    return rp.q;
  };
  cal.sim.input = make("input", input);
  cal.sim.blocks.resize(nb);
  cal.sim.head_quantized = plan.quantizes(kHeadLayer);
  const auto names = block_names(model.config);
  QuantParams prev = cal.sim.input;
  for (std::size_t i = 0; i < nb; ++i) {
    auto& bq = cal.sim.blocks[i];
    if (model.blocks[i].spec.kind == BlockKind::kPool) {
      bq.out = prev;
      continue;
    }
    bq.quantized = plan.quantizes(names[i]);
    auto& pts = points[i];
    if (pts.count("dw")) bq.dw = make(names[i] + ".dw", pts["dw"]);
    if (pts.count("branch")) bq.branch = make(names[i] + ".branch", pts["branch"]);
    if (pts.count("residual")) bq.residual = make(names[i] + ".residual", pts["residual"]);
    bq.out = make(names[i] + ".out", pts["out"]);
    prev = bq.out;
  }
  return cal;
}

/// Draws `count` distinct epochs (all when fewer exist) as [N, 1, L].
inline Tensor<float> sample_epochs(std::span<const EpochRecording> recs, std::size_t count, std::uint64_t seed) {
  auto refs = all_epochs(recs);
  if (refs.empty()) throw ValueError("no epochs to sample from");
  Rng rng(seed);
  rng.shuffle(refs.begin(), refs.end());
  refs.resize(std::min(count, refs.size()));
  return gather_epochs(recs, refs);
}

// ---------------------------------------------------------------------------
// Quantization-aware fine-tuning

/// Folded CNN whose quantized layers hold int8-representable weights, plus
/// the activation mappings the integer runtime compiles from.
struct QuantizedModel {
  MorpheusModel<float> model;
  QuantSim sim;
  QuantizationPlan plan;
  std::vector<CalibrationRow> calibration;
};

struct QatConfig {
  PhaseConfig cnn{1e-4, 128, 5};
  PhaseConfig seq{1e-3, 32, 5};
  std::uint64_t seed = 1;
};

/// Snaps every weight of the quantized layers onto its symmetric int8 grid.
inline void freeze_weights_to_int8(MorpheusModel<float>& m, const QuantSim& sim) {
  for (std::size_t i = 0; i < m.blocks.size(); ++i) {
    if (!sim.blocks.at(i).quantized) continue;
    auto& b = m.blocks[i];
    for (auto* w : {&b.conv.weight, &b.sep.depthwise, &b.sep.pointwise, &b.residual.weight})
      if (!w->empty()) *w = fake_quantize_weight(*w);
  }
  if (sim.head_quantized) m.head.weight = fake_quantize_weight(m.head.weight);
}

/// Applies the plan's flags: keep_float layers are frozen for fine-tuning.
inline void apply_plan(MorpheusModel<float>& m, const QuantizationPlan& plan) {
  plan.validate(m.config);
  const auto names = block_names(m.config);
  for (std::size_t i = 0; i < m.blocks.size(); ++i)
    m.blocks[i].frozen = m.blocks[i].spec.kind != BlockKind::kPool && !plan.quantizes(names[i]);
  m.head_frozen = !plan.quantizes(kHeadLayer);
}

struct QatResult {
  QuantizedModel quantized;
  FitResult fit;
};

/// Folds batchnorm, calibrates on training epochs, fine-tunes with fake
/// quantization for `cfg.cnn.epochs` epochs (keep_float layers frozen,
/// best-on-validation kept), then snaps quantized weights to int8.
inline QatResult qat_finetune_cnn(const MorpheusModel<float>& trained, const QuantizationPlan& plan,
                                  std::span<const EpochRecording> train, std::span<const EpochRecording> val,
                                  const QatConfig& cfg = {}, History* history = nullptr,
                                  const EpochLogger& log = {}) {
  QatResult res;
  auto& q = res.quantized;
  q.plan = plan;
  q.model = fold_model(trained);
  apply_plan(q.model, plan);
  auto cal = calibrate_ranges(q.model, sample_epochs(train, plan.calibration_samples, cfg.seed), plan);
  q.sim = std::move(cal.sim);
  q.calibration = std::move(cal.rows);
  TrainConfig tc;
  tc.seed = cfg.seed;
  res.fit = train_cnn(q.model, train, val, cfg.cnn, tc, &q.sim, history, log, "qat");
  freeze_weights_to_int8(q.model, q.sim);
  return res;
}

/// Retrains the sequence learner on the quantized CNN's probability outputs.
inline FitResult finetune_sequence_on_quantized(QuantizedModel& q, std::span<const EpochRecording> train,
                                                std::span<const EpochRecording> val, const QatConfig& cfg = {},
                                                History* history = nullptr, const EpochLogger& log = {}) {
  const std::size_t len = q.model.config.sequence_len;
  const auto st = make_sequence_dataset(cnn_probability_tables(q.model, train, &q.sim), train, len);
  const auto sv = make_sequence_dataset(cnn_probability_tables(q.model, val, &q.sim), val, len);
  if (st.empty() || sv.empty()) throw ValueError("sequence fine-tune: recordings shorter than the window");
  TrainConfig tc;
  tc.seed = cfg.seed;
  return train_sequence_learner(q.model.seq, st, sv, cfg.seq, tc, history, log, "seq_finetune");
}

// ---------------------------------------------------------------------------
// Persistence: the float container with quantization metadata.

inline KeyValues quant_metadata(const QuantizedModel& q) {
  KeyValues kv;
  auto qp = [](const QuantParams& p) { return format_number(p.scale) + " " + std::to_string(p.zero_point); };
  kv.set("quant.calibration_samples", std::to_string(q.plan.calibration_samples));
  for (const auto& [n, on] : q.plan.layers) kv.set("quant.plan." + n, on ? "quantize" : "keep_float");
  kv.set("quant.input", qp(q.sim.input));
  kv.set("quant.head_quantized", q.sim.head_quantized ? "1" : "0");
  for (std::size_t i = 0; i < q.sim.blocks.size(); ++i) {
    const auto& b = q.sim.blocks[i];
    const std::string k = "quant.block" + std::to_string(i) + ".";
    kv.set(k + "quantized", b.quantized ? "1" : "0");
    kv.set(k + "out", qp(b.out));
    kv.set(k + "dw", qp(b.dw));
    kv.set(k + "branch", qp(b.branch));
    kv.set(k + "residual", qp(b.residual));
  }
  return kv;
}

inline QuantizedModel quantized_from_checkpoint(const Checkpoint& ck) {
  const auto& kv = ck.meta;
  if (!kv.has("quant.input")) throw ValueError("checkpoint carries no quantization data");
  auto qp = [&](const std::string& key) {
    const auto parts = split_ws(kv.get(key));
    if (parts.size() != 2) throw ValueError("'" + key + "' must be '<scale> <zero_point>'");
    QuantParams p{KeyValues::to_number<double>(parts[0], key), KeyValues::to_number<int>(parts[1], key)};
    if (!(p.scale > 0) || p.zero_point < kQMin || p.zero_point > kQMax)
      throw ValueError("'" + key + "' holds an invalid mapping");
    return p;
  };
  QuantizedModel q;
  q.model = ck.model;
  if (!q.model.folded) throw ValueError("quantized checkpoint must hold a folded model");
  q.plan.calibration_samples = kv.number<std::size_t>("quant.calibration_samples");
  for (const auto& n : QuantizationPlan::layer_names(q.model.config)) {
    const auto v = kv.get("quant.plan." + n);
    if (v != "quantize" && v != "keep_float") throw ValueError("plan entry for '" + n + "' is '" + v + "'");
    q.plan.layers.emplace_back(n, v == "quantize");
  }
  q.sim.input = qp("quant.input");
  q.sim.head_quantized = kv.get("quant.head_quantized") == "1";
  q.sim.blocks.resize(q.model.blocks.size());
  for (std::size_t i = 0; i < q.sim.blocks.size(); ++i) {
    auto& b = q.sim.blocks[i];
    const std::string k = "quant.block" + std::to_string(i) + ".";
    b.quantized = kv.get(k + "quantized") == "1";
    b.out = qp(k + "out");
    b.dw = qp(k + "dw");
    b.branch = qp(k + "branch");
    b.residual = qp(k + "residual");
  }
  return q;
}

inline Bytes save_quantized(const QuantizedModel& q, const KeyValues& extra = {}) {
  auto meta = quant_metadata(q);
  for (const auto& [k, v] : extra.entries()) meta.set(k, v);
  return save_checkpoint(q.model, meta);
}

inline QuantizedModel load_quantized(std::span<const std::uint8_t> bytes) {
  return quantized_from_checkpoint(load_checkpoint(bytes));
}

}  // namespace morpheus
