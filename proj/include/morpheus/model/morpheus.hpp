// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The MorpheusNet Authors

#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "morpheus/core/random.hpp"
#include "morpheus/model/config.hpp"
#include "morpheus/ops/activation.hpp"
#include "morpheus/ops/batchnorm.hpp"
#include "morpheus/ops/conv.hpp"
#include "morpheus/ops/dense.hpp"
#include "morpheus/ops/lstm.hpp"
#include "morpheus/ops/pool.hpp"
#include "morpheus/quant/qparams.hpp"

namespace morpheus {

/// Activation quantization points inside one block. Pools carry their input
/// parameters in `out`.
struct BlockQuant {
  bool quantized = false;
  QuantParams out;
  QuantParams dw;        // depthwise output (conv / identity blocks)
  QuantParams branch;    // relu branch output (conv / identity blocks)
  QuantParams residual;  // pointwise projection (conv blocks)

  bool operator==(const BlockQuant&) const = default;
};

/// Fake-quantization settings for a whole CNN. Block outputs are always
/// rounded to their int8 grid; block internals only when `quantized`. The
/// raw input is rounded only when the first block is quantized, since a
/// float first block reads float samples.
struct QuantSim {
  QuantParams input;
  std::vector<BlockQuant> blocks;
  bool head_quantized = true;

  bool operator==(const QuantSim&) const = default;
};

inline bool input_quantized(const QuantSim& sim) { return !sim.blocks.empty() && sim.blocks.front().quantized; }

template <typename T>
struct Block {
  LayerSpec spec;
  Conv1dParams<T> conv;          // start block
  SeparableConv1dParams<T> sep;  // conv / identity branch
  Conv1dParams<T> residual;      // conv block projection, kernel 1
  BatchNormState<T> bn;
  bool frozen = false;  // skipped by the optimizer

  bool has_bn() const { return !bn.gamma.empty(); }

  /// Trainable tensors with stable names (running statistics excluded).
  std::vector<std::pair<std::string, Tensor<T>*>> named_params() {
    std::vector<std::pair<std::string, Tensor<T>*>> out;
    switch (spec.kind) {
      case BlockKind::kStart:
        out = {{"conv.weight", &conv.weight}, {"conv.bias", &conv.bias}};
        break;
      case BlockKind::kConvBlock:
        out = {{"residual.weight", &residual.weight}, {"residual.bias", &residual.bias}};
        [[fallthrough]];
      case BlockKind::kIdentityBlock:
        out.insert(out.end(), {{"sep.depthwise", &sep.depthwise},
                               {"sep.pointwise", &sep.pointwise},
                               {"sep.bias", &sep.bias}});
        break;
      case BlockKind::kPool: break;
    }
    if (has_bn()) out.insert(out.end(), {{"bn.gamma", &bn.gamma}, {"bn.beta", &bn.beta}});
    return out;
  }

  std::vector<std::pair<std::string, Tensor<T>*>> named_state() {
    auto out = named_params();
    if (has_bn()) {
      out.insert(out.end(), {{"bn.running_mean", &bn.running_mean}, {"bn.running_var", &bn.running_var}});
    }
    return out;
  }
};

template <typename T>
struct SequenceLearner {
  LstmParams<T> lstm;
  DenseParams<T> hidden;  // relu
  DenseParams<T> output;
  double dropout = 0.2;

  std::vector<std::pair<std::string, Tensor<T>*>> named_params() {
    return {{"seq.lstm.weight", &lstm.weight}, {"seq.lstm.bias", &lstm.bias},
            {"seq.hidden.weight", &hidden.weight}, {"seq.hidden.bias", &hidden.bias},
            {"seq.output.weight", &output.weight}, {"seq.output.bias", &output.bias}};
  }

  std::vector<Tensor<T>*> params() {
    std::vector<Tensor<T>*> out;
    for (auto& [n, p] : named_params()) out.push_back(p);
    return out;
  }

  std::size_t param_count() const {
    return lstm.param_count() + hidden.param_count() + output.param_count();
  }
};

template <typename T>
struct MorpheusModel {
  MorpheusConfig config;
  std::vector<Block<T>> blocks;
  DenseParams<T> head;
  SequenceLearner<T> seq;
  bool folded = false;  // batchnorm merged into the conv weights
  bool head_frozen = false;

  std::vector<std::pair<std::string, Tensor<T>*>> named_cnn_state() {
    std::vector<std::pair<std::string, Tensor<T>*>> out;
    for (std::size_t i = 0; i < blocks.size(); ++i)
      for (auto& [n, p] : blocks[i].named_state())
        out.emplace_back("block" + std::to_string(i) + "." + n, p);
    out.emplace_back("head.weight", &head.weight);
    out.emplace_back("head.bias", &head.bias);
    return out;
  }

  std::vector<std::pair<std::string, Tensor<T>*>> named_tensors() {
    auto out = named_cnn_state();
    for (auto& e : seq.named_params()) out.push_back(e);
    return out;
  }

  /// Trainable CNN tensors, skipping frozen blocks.
  std::vector<Tensor<T>*> cnn_params() {
    std::vector<Tensor<T>*> out;
    for (auto& b : blocks) {
      if (b.frozen) continue;
      for (auto& [n, p] : b.named_params()) out.push_back(p);
    }
    if (!head_frozen) {
      out.push_back(&head.weight);
      out.push_back(&head.bias);
    }
    return out;
  }
};

template <typename T>
std::size_t block_param_count(const Block<T>& b) {
  std::size_t n = b.has_bn() ? b.bn.gamma.size() + b.bn.beta.size() : 0;
  switch (b.spec.kind) {
    case BlockKind::kStart: return n + b.conv.param_count();
    case BlockKind::kConvBlock: return n + b.sep.param_count() + b.residual.param_count();
    case BlockKind::kIdentityBlock: return n + b.sep.param_count();
    case BlockKind::kPool: return 0;
  }
  return 0;
}

/// Exact trainable scalar count: weights, biases, batchnorm gamma/beta.
template <typename T>
std::size_t cnn_param_count(const MorpheusModel<T>& m) {
  std::size_t n = m.head.param_count();
  for (const auto& b : m.blocks) n += block_param_count(b);
  return n;
}

template <typename T>
std::size_t param_count(const MorpheusModel<T>& m) {
  return cnn_param_count(m) + m.seq.param_count();
}

/// Unique plan names: start, conv_block_1, identity_block_1, ... Pools have
/// names too (pool_1, ...) although plans ignore them.
inline std::vector<std::string> block_names(const MorpheusConfig& cfg) {
  std::vector<std::string> out;
  std::size_t starts = 0, convs = 0, ids = 0, pools = 0;
  for (const auto& l : cfg.layers) {
    switch (l.kind) {
      case BlockKind::kStart:
        ++starts;
        out.push_back(starts == 1 ? "start" : "start_" + std::to_string(starts));
        break;
      case BlockKind::kConvBlock: out.push_back("conv_block_" + std::to_string(++convs)); break;
      case BlockKind::kIdentityBlock: out.push_back("identity_block_" + std::to_string(++ids)); break;
      case BlockKind::kPool: out.push_back("pool_" + std::to_string(++pools)); break;
    }
  }
  return out;
}

template <typename T>
SequenceLearner<T> build_sequence_learner(const MorpheusConfig& cfg, Rng& rng) {
  SequenceLearner<T> s;
  s.lstm = LstmParams<T>::init(cfg.classes, cfg.lstm_hidden, rng);
  s.hidden = DenseParams<T>::glorot(cfg.lstm_hidden, cfg.dense_hidden, rng);
  s.output = DenseParams<T>::glorot(cfg.dense_hidden, cfg.classes, rng);
  s.dropout = cfg.dropout;
  return s;
}

template <typename T>
MorpheusModel<T> build_morpheus(const MorpheusConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  Rng rng(seed);
  MorpheusModel<T> m;
  m.config = cfg;
  std::size_t ch = 1;
  for (const auto& spec : cfg.layers) {
    Block<T> b;
    b.spec = spec;
    switch (spec.kind) {
      case BlockKind::kStart:
        b.conv = {Tensor<T>(Shape{spec.filters, ch, spec.kernel}), Tensor<T>(Shape{spec.filters})};
        fill_he_uniform(b.conv.weight, rng, ch * spec.kernel);
        b.bn = BatchNormState<T>::identity(spec.filters);
        ch = spec.filters;
        break;
      case BlockKind::kConvBlock:
        b.residual = {Tensor<T>(Shape{spec.filters, ch, 1}), Tensor<T>(Shape{spec.filters})};
        fill_he_uniform(b.residual.weight, rng, ch);
        [[fallthrough]];
      case BlockKind::kIdentityBlock:
        b.sep = {Tensor<T>(Shape{ch, spec.kernel}), Tensor<T>(Shape{spec.filters, ch}),
                 Tensor<T>(Shape{spec.filters})};
        fill_he_uniform(b.sep.depthwise, rng, spec.kernel);
        fill_he_uniform(b.sep.pointwise, rng, ch);
        b.bn = BatchNormState<T>::identity(spec.filters);
        ch = spec.filters;
        break;
      case BlockKind::kPool: break;
    }
    m.blocks.push_back(std::move(b));
  }
  m.head = DenseParams<T>::glorot(ch, cfg.classes, rng);
  m.seq = build_sequence_learner<T>(cfg, rng);
  return m;
}

/// Merges every block's batchnorm into its conv weights (inference
/// statistics) and drops the batchnorm state.
template <typename T>
MorpheusModel<T> fold_model(const MorpheusModel<T>& m) {
  if (m.folded) return m;
  MorpheusModel<T> f = m;
  for (auto& b : f.blocks) {
    if (!b.has_bn()) continue;
    if (b.spec.kind == BlockKind::kStart) b.conv = fold_batchnorm(b.conv, b.bn);
    else b.sep = fold_batchnorm(b.sep, b.bn);
    b.bn = {};
  }
  f.folded = true;
  return f;
}

// ---------------------------------------------------------------------------
// CNN forward / backward

template <typename T>
struct BlockTrace {
  Tensor<T> input;
  Tensor<T> w_main;      // effective (possibly fake-quantized) weights
  Tensor<T> w_pw;
  Tensor<T> w_res;
  Tensor<T> dw, dw_q;    // depthwise output before / after rounding
  Tensor<T> z;           // conv output before batchnorm
  Tensor<T> n;           // batchnorm output (relu input)
  Tensor<T> a;           // relu output
  Tensor<T> r;           // residual projection before rounding
  Tensor<T> s;           // pre-boundary output (sum or relu)
  Tensor<T> o;           // block output before the start block's pool
};

template <typename T>
struct CnnTrace {
  std::vector<BlockTrace<T>> blocks;
  Tensor<T> features;  // last block output
  Tensor<T> gap_raw;   // global average before rounding
  Tensor<T> pooled;
  Tensor<T> head_w;
};

namespace detail {

template <typename T>
Tensor<T> maybe_fq(const Tensor<T>& x, const QuantParams* q) {
  return q ? fake_quantize(x, *q) : x;
}

template <typename T>
Tensor<T> maybe_fq_backward(const Tensor<T>& x, const QuantParams* q, const Tensor<T>& dy) {
  return q ? fake_quantize_backward(x, *q, dy) : dy;
}

template <typename T>
Tensor<T> maybe_fq_weight(const Tensor<T>& w, bool quantized) {
  return quantized ? fake_quantize_weight(w) : w;
}

template <typename T>
Tensor<T> as_batch(const Tensor<T>& x, std::size_t input_len) {
  if (x.rank() == 3 && x.dim(1) == 1 && x.dim(2) == input_len) return x;
  if (x.rank() == 2 && x.dim(0) == 1 && x.dim(1) == input_len) return x.reshaped({1, 1, input_len});
  if (x.rank() == 1 && x.dim(0) == input_len) return x.reshaped({1, 1, input_len});
  throw ShapeError("model input must be [" + std::to_string(input_len) + "], [1, " +
                   std::to_string(input_len) + "] or [B, 1, " + std::to_string(input_len) +
                   "], got " + shape_to_string(x.shape()));
}

template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b) {
  Tensor<T> out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += b[i];
  return out;
}

template <typename T>
Tensor<T> block_forward(Block<T>& blk, const Tensor<T>& x, Mode mode, bool folded,
                        const BlockQuant* bq, BlockTrace<T>* tr) {
  const bool q = bq && bq->quantized;
  const QuantParams* out_q = bq ? &bq->out : nullptr;
  auto norm = [&](const Tensor<T>& z) {
    if (folded || !blk.has_bn()) return z;
    if (mode == Mode::kTrain) return batchnorm1d(z, blk.bn, mode);
    BatchNormState<T> s = blk.bn;
    return batchnorm1d(z, s, Mode::kInfer);
  };
  BlockTrace<T> local;
  BlockTrace<T>& t = tr ? *tr : local;
  t.input = x;
  switch (blk.spec.kind) {
    case BlockKind::kStart: {
      t.w_main = maybe_fq_weight(blk.conv.weight, q);
      t.z = conv1d(x, Conv1dParams<T>{t.w_main, blk.conv.bias, blk.conv.stride, blk.conv.padding});
      t.n = norm(t.z);
      t.a = relu(t.n);
      t.s = t.a;
      t.o = maybe_fq(t.s, out_q);
      return blk.spec.pool_size ? pool1d(t.o, PoolKind::kMax, blk.spec.pool_size) : t.o;
    }
    case BlockKind::kConvBlock:
    case BlockKind::kIdentityBlock: {
      t.w_main = maybe_fq_weight(blk.sep.depthwise, q);
      t.w_pw = maybe_fq_weight(blk.sep.pointwise, q);
      t.dw = depthwise_conv1d(x, t.w_main, blk.sep.stride, blk.sep.padding);
      t.dw_q = q ? fake_quantize(t.dw, bq->dw) : t.dw;
      t.z = pointwise_conv1d(t.dw_q, t.w_pw, blk.sep.bias);
      t.n = norm(t.z);
      t.a = relu(t.n);
      const Tensor<T> branch = q ? fake_quantize(t.a, bq->branch) : t.a;
      if (blk.spec.kind == BlockKind::kConvBlock) {
        t.w_res = maybe_fq_weight(blk.residual.weight, q);
        t.r = conv1d(x, Conv1dParams<T>{t.w_res, blk.residual.bias, 1, Padding::kSame});
        t.s = add(branch, q ? fake_quantize(t.r, bq->residual) : t.r);
      } else {
        t.s = add(branch, x);
      }
      t.o = maybe_fq(t.s, out_q);
      return t.o;
    }
    case BlockKind::kPool: {
      t.s = pool1d(x, blk.spec.pool, blk.spec.pool_size);
      t.o = maybe_fq(t.s, out_q);
      return t.o;
    }
  }
  throw ValueError("unknown block kind");
}

/// Writes parameter gradients into the block's tensors and returns dX.
template <typename T>
Tensor<T> block_backward(Block<T>& blk, const BlockTrace<T>& t, const Tensor<T>& dy, Mode mode,
                         bool folded, const BlockQuant* bq) {
  const bool q = bq && bq->quantized;
  const QuantParams* out_q = bq ? &bq->out : nullptr;
  auto norm_backward = [&](const Tensor<T>& dn) {
    if (folded || !blk.has_bn()) return dn;
    auto g = batchnorm1d_backward(t.z, blk.bn, mode, dn);
    blk.bn.gamma.set_grad(g.gamma);
    blk.bn.beta.set_grad(g.beta);
    return std::move(g.input);
  };
  switch (blk.spec.kind) {
    case BlockKind::kStart: {
      Tensor<T> d_o = blk.spec.pool_size ? pool1d_backward(t.o, PoolKind::kMax, blk.spec.pool_size, dy) : dy;
      const Tensor<T> da = maybe_fq_backward(t.s, out_q, d_o);
      const Tensor<T> dz = norm_backward(relu_backward(t.n, da));
      auto g = conv1d_backward(t.input, Conv1dParams<T>{t.w_main, blk.conv.bias, blk.conv.stride, blk.conv.padding}, dz);
      blk.conv.weight.set_grad(g.weight);  // straight through the weight rounding
      blk.conv.bias.set_grad(g.bias);
      return std::move(g.input);
    }
    case BlockKind::kConvBlock:
    case BlockKind::kIdentityBlock: {
      const Tensor<T> ds = maybe_fq_backward(t.s, out_q, dy);
      Tensor<T> dx;
      if (blk.spec.kind == BlockKind::kConvBlock) {
        const Tensor<T> dr = q ? fake_quantize_backward(t.r, bq->residual, ds) : ds;
        auto g = conv1d_backward(t.input, Conv1dParams<T>{t.w_res, blk.residual.bias, 1, Padding::kSame}, dr);
        blk.residual.weight.set_grad(g.weight);
        blk.residual.bias.set_grad(g.bias);
        dx = std::move(g.input);
      } else {
        dx = ds;
      }
      const Tensor<T> da = q ? fake_quantize_backward(t.a, bq->branch, ds) : ds;
      const Tensor<T> dz = norm_backward(relu_backward(t.n, da));
      auto pg = pointwise_conv1d_backward(t.dw_q, t.w_pw, dz);
      blk.sep.pointwise.set_grad(pg.weight);
      blk.sep.bias.set_grad(pg.bias);
      const Tensor<T> ddw = q ? fake_quantize_backward(t.dw, bq->dw, pg.input) : pg.input;
      auto [dxb, dk] = depthwise_conv1d_backward(t.input, t.w_main, ddw, blk.sep.stride, blk.sep.padding);
      blk.sep.depthwise.set_grad(dk);
      for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += dxb[i];
      return dx;
    }
    case BlockKind::kPool: {
      const Tensor<T> ds = maybe_fq_backward(t.s, out_q, dy);
      return pool1d_backward(t.input, blk.spec.pool, blk.spec.pool_size, ds);
    }
  }
  throw ValueError("unknown block kind");
}

inline const BlockQuant* block_quant(const QuantSim* sim, std::size_t i) {
  return sim ? &sim->blocks.at(i) : nullptr;
}

}  // namespace detail

/// Logits [B, classes] for x [B, 1, L] (or a single epoch). `mode` selects
/// batchnorm statistics; kTrain updates running statistics.
template <typename T>
Tensor<T> cnn_logits(MorpheusModel<T>& m, const Tensor<T>& x, Mode mode,
                     const QuantSim* sim = nullptr, CnnTrace<T>* trace = nullptr) {
  Tensor<T> h = detail::as_batch(x, m.config.input_len);
  if (sim && sim->blocks.size() != m.blocks.size()) {
    throw ShapeError("quantization settings cover " + std::to_string(sim->blocks.size()) +
                     " blocks, model has " + std::to_string(m.blocks.size()));
  }
  if (sim && input_quantized(*sim)) h = fake_quantize(h, sim->input);
  if (trace) trace->blocks.resize(m.blocks.size());
  for (std::size_t i = 0; i < m.blocks.size(); ++i) {
    h = detail::block_forward(m.blocks[i], h, mode, m.folded, detail::block_quant(sim, i),
                              trace ? &trace->blocks[i] : nullptr);
  }
  Tensor<T> g = global_avg_pool(h);
  Tensor<T> pooled = sim ? fake_quantize(g, sim->blocks.back().out) : g;
  Tensor<T> hw = detail::maybe_fq_weight(m.head.weight, sim && sim->head_quantized);
  Tensor<T> logits = dense(pooled, DenseParams<T>{hw, m.head.bias});
  if (trace) {
    trace->features = std::move(h);
    trace->gap_raw = std::move(g);
    trace->pooled = std::move(pooled);
    trace->head_w = std::move(hw);
  }
  return logits;
}

/// Back-propagates dlogits through a traced forward pass; gradients land in
/// the parameters' grad buffers (frozen blocks are still traversed for dX).
template <typename T>
void cnn_backward(MorpheusModel<T>& m, const CnnTrace<T>& trace, const Tensor<T>& dlogits,
                  Mode mode, const QuantSim* sim = nullptr) {
  auto hg = dense_backward(trace.pooled, DenseParams<T>{trace.head_w, m.head.bias}, dlogits);
  m.head.weight.set_grad(hg.weight);
  m.head.bias.set_grad(hg.bias);
  Tensor<T> dg = sim ? fake_quantize_backward(trace.gap_raw, sim->blocks.back().out, hg.input) : hg.input;
  Tensor<T> dh = global_avg_pool_backward(trace.features, dg);
  for (std::size_t i = m.blocks.size(); i-- > 0;) {
    dh = detail::block_backward(m.blocks[i], trace.blocks[i], dh, mode, m.folded,
                                detail::block_quant(sim, i));
  }
}

/// Stage probabilities for one epoch (inference statistics).
template <typename T>
Tensor<T> cnn_forward(const MorpheusModel<T>& m, const Tensor<T>& epoch, const QuantSim* sim = nullptr) {
  auto& mm = const_cast<MorpheusModel<T>&>(m);  // kInfer never writes model state
  return softmax(cnn_logits(mm, epoch, Mode::kInfer, sim)).reshaped({m.config.classes});
}

/// Probabilities [B, classes] for a batch.
template <typename T>
Tensor<T> cnn_probabilities(const MorpheusModel<T>& m, const Tensor<T>& batch,
                            const QuantSim* sim = nullptr) {
  auto& mm = const_cast<MorpheusModel<T>&>(m);
  return softmax(cnn_logits(mm, batch, Mode::kInfer, sim));
}

// ---------------------------------------------------------------------------
// Sequence learner: LSTM -> dropout -> dense relu -> dropout -> dense

template <typename T>
struct SeqTrace {
  Tensor<T> window;
  Tensor<T> hidden_seq;
  Tensor<T> last, mask1, d1, z1, a1, mask2, d2;
};

template <typename T>
Tensor<T> seq_logits(const SequenceLearner<T>& s, const Tensor<T>& window, Mode mode, Rng* rng,
                     SeqTrace<T>* trace = nullptr) {
  if (window.rank() != 2 || window.dim(1) != s.lstm.input_size) {
    throw ShapeError("sequence learner expects [steps, " + std::to_string(s.lstm.input_size) +
                     "], got " + shape_to_string(window.shape()));
  }
  if (mode == Mode::kTrain && !rng) throw ValueError("sequence learner: training mode needs an Rng");
  SeqTrace<T> local;
  SeqTrace<T>& t = trace ? *trace : local;
  const std::size_t H = s.lstm.hidden_size, steps = window.dim(0);
  t.window = window;
  t.hidden_seq = lstm_sequence(window, s.lstm);
  t.last = Tensor<T>(Shape{H});
  std::copy_n(t.hidden_seq.data() + (steps - 1) * H, H, t.last.data());
  Rng dummy(0);
  Rng& r = rng ? *rng : dummy;
  t.d1 = dropout(t.last, s.dropout, r, mode, &t.mask1);
  t.z1 = dense(t.d1, s.hidden);
  t.a1 = relu(t.z1);
  t.d2 = dropout(t.a1, s.dropout, r, mode, &t.mask2);
  return dense(t.d2, s.output);
}

/// Accumulates parameter gradients (so per-sample calls sum over a batch).
template <typename T>
void seq_backward(SequenceLearner<T>& s, const SeqTrace<T>& t, const Tensor<T>& dlogits) {
  auto go = dense_backward(t.d2, s.output, dlogits);
  s.output.weight.accumulate_grad(go.weight);
  s.output.bias.accumulate_grad(go.bias);
  const Tensor<T> da1 = t.mask2.empty() ? go.input : dropout_backward(t.mask2, go.input);
  auto gh = dense_backward(t.d1, s.hidden, relu_backward(t.z1, da1));
  s.hidden.weight.accumulate_grad(gh.weight);
  s.hidden.bias.accumulate_grad(gh.bias);
  const Tensor<T> dlast = t.mask1.empty() ? gh.input : dropout_backward(t.mask1, gh.input);
  Tensor<T> dh(t.hidden_seq.shape());
  const std::size_t H = s.lstm.hidden_size, steps = t.window.dim(0);
  std::copy_n(dlast.data(), H, dh.data() + (steps - 1) * H);
  auto gl = lstm_sequence_backward(t.window, s.lstm, dh);
  s.lstm.weight.accumulate_grad(gl.weight);
  s.lstm.bias.accumulate_grad(gl.bias);
}

template <typename T>
Tensor<T> seq_probabilities(const SequenceLearner<T>& s, const Tensor<T>& window) {
  return softmax(seq_logits(s, window, Mode::kInfer, nullptr));
}

}  // namespace morpheus
