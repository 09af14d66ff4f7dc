// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The MorpheusNet Authors

#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "morpheus/quant/quantize.hpp"
#include "morpheus/util/binary.hpp"

namespace morpheus::runtime {

inline constexpr char kFlatMagic[4] = {'M', 'N', 'Q', '1'};
inline constexpr std::uint16_t kFlatVersion = 1;
inline constexpr std::size_t kFlatModelBudget = 102400;

enum class OpKind : std::uint8_t {
  kQuant = 1,
  kDequant,
  kConv,
  kDepthwise,
  kPointwise,
  kAdd,
  kMaxPool,
  kAvgPool,
  kGlobalAvgPool,
  kDense,
  kSoftmax,
};

inline const char* to_string(OpKind k) {
  switch (k) {
    case OpKind::kQuant: return "QUANT";
    case OpKind::kDequant: return "DEQUANT";
    case OpKind::kConv: return "CONV";
    case OpKind::kDepthwise: return "DEPTHWISE";
    case OpKind::kPointwise: return "POINTWISE";
    case OpKind::kAdd: return "ADD";
    case OpKind::kMaxPool: return "MAXPOOL";
    case OpKind::kAvgPool: return "AVGPOOL";
    case OpKind::kGlobalAvgPool: return "GAP";
    case OpKind::kDense: return "DENSE";
    case OpKind::kSoftmax: return "SOFTMAX";
  }
  return "?";
}

/// One entry of the layer table. Tensor 0 is the float input epoch; layer i
/// produces tensor i + 1. `channels`/`length` describe the output. `kernel`
/// is the conv kernel or pool window. Quantized conv-type ops requantize with
/// `m0`; ADD rescales its two inputs with `m0` and `m1`.
struct FlatLayer {
  OpKind kind = OpKind::kQuant;
  bool quantized = false;
  bool relu = false;
  std::string name;
  std::vector<std::uint16_t> inputs;
  std::uint16_t channels = 0;
  std::uint16_t length = 0;
  std::uint16_t kernel = 0;
  QuantParams out{1.0, 0};
  RequantMultiplier m0;
  RequantMultiplier m1;
  double weight_scale = 0;
  std::uint32_t weight_offset = 0;
  std::uint32_t weight_bytes = 0;
  std::uint32_t bias_offset = 0;
  std::uint32_t bias_bytes = 0;

  bool operator==(const FlatLayer&) const = default;
};

struct TensorInfo {
  bool int8 = false;
  std::size_t channels = 0;
  std::size_t length = 0;
  QuantParams q{1.0, 0};  // meaningful for int8 tensors

  std::size_t elements() const { return channels * length; }
  std::size_t bytes() const { return elements() * (int8 ? 1 : sizeof(float)); }
};

struct FlatModel {
  std::uint32_t input_len = 0;
  std::uint16_t classes = 0;
  std::uint16_t sequence_len = 0;
  std::uint16_t lstm_hidden = 0;
  std::uint16_t dense_hidden = 0;
  QuantParams input{1.0, 0};
  std::vector<FlatLayer> layers;
  Bytes blob;                   // weights and biases, 4-byte aligned entries
  std::vector<float> sequence;  // lstm W, b; hidden W, b; output W, b

  bool operator==(const FlatModel&) const = default;

  std::size_t sequence_floats() const {
    const std::size_t K = classes, H = lstm_hidden, D = dense_hidden;
    return 4 * H * (K + H) + 4 * H + D * H + D + K * D + K;
  }

  Bytes to_bytes() const;
  static FlatModel from_bytes(std::span<const std::uint8_t> bytes);
};

namespace detail {

inline std::size_t weight_count(const FlatLayer& l, const TensorInfo& in) {
  switch (l.kind) {
    case OpKind::kConv: return std::size_t{l.channels} * in.channels * l.kernel;
    case OpKind::kDepthwise: return in.channels * std::size_t{l.kernel};
    case OpKind::kPointwise: return std::size_t{l.channels} * in.channels;
    case OpKind::kDense: return std::size_t{l.channels} * in.channels;
    default: return 0;
  }
}

inline std::size_t bias_count(const FlatLayer& l) {
  switch (l.kind) {
    case OpKind::kConv:
    case OpKind::kPointwise:
    case OpKind::kDense: return l.channels;
    default: return 0;
  }
}

inline bool valid_multiplier(const RequantMultiplier& m) {
  return m.multiplier >= (1 << 30) && m.shift <= 31 && m.shift > -64;
}

}  // namespace detail

/// Checks every layer against its inputs and returns the type and shape of
/// each tensor (index 0 is the input). Errors name the offending layer.
inline std::vector<TensorInfo> resolve_tensors(const FlatModel& fm) {
  if (fm.input_len == 0) throw ShapeError("flat model: zero input length");
  std::vector<TensorInfo> t;
  t.push_back({false, 1, fm.input_len, {}});
  for (std::size_t i = 0; i < fm.layers.size(); ++i) {
    const auto& l = fm.layers[i];
    const std::string where = "flat model layer " + std::to_string(i) + " (" + to_string(l.kind) + " '" + l.name + "')";
    const std::size_t want_inputs = l.kind == OpKind::kAdd ? 2 : 1;
    if (l.inputs.size() != want_inputs) throw ShapeError(where + ": wrong input count");
    for (const auto id : l.inputs)
      if (id > i) throw ShapeError(where + ": input tensor " + std::to_string(id) + " not yet produced");
    const TensorInfo& a = t[l.inputs[0]];
    auto need_int8 = [&](bool want) {
      if (a.int8 != want) throw ShapeError(where + ": expects " + (want ? "int8" : "float") + " input");
    };
    TensorInfo o{l.quantized, l.channels, l.length, l.out};
    switch (l.kind) {
      case OpKind::kQuant:
        need_int8(false);
        o = {true, a.channels, a.length, l.out};
        break;
      case OpKind::kDequant:
        need_int8(true);
        o = {false, a.channels, a.length, {}};
        break;
      case OpKind::kConv:
      case OpKind::kDepthwise:
      case OpKind::kPointwise:
        need_int8(l.quantized);
        if (l.kernel == 0 && l.kind != OpKind::kPointwise) throw ShapeError(where + ": zero kernel");
        o.length = a.length;
        if (l.kind == OpKind::kDepthwise) o.channels = a.channels;
        break;
      case OpKind::kAdd: {
        const TensorInfo& b = t[l.inputs[1]];
        need_int8(l.quantized);
        if (b.int8 != a.int8 || b.channels != a.channels || b.length != a.length)
          throw ShapeError(where + ": operands differ in type or shape");
        o.channels = a.channels;
        o.length = a.length;
        break;
      }
      case OpKind::kMaxPool:
      case OpKind::kAvgPool:
        need_int8(true);
        if (l.kernel == 0 || a.length / l.kernel == 0) throw ShapeError(where + ": pool window too large");
        o = {true, a.channels, a.length / l.kernel, l.out};
        if (!(l.out == a.q)) throw ValueError(where + ": pool must keep its input quantization");
        break;
      case OpKind::kGlobalAvgPool:
        need_int8(true);
        o = {true, a.channels, 1, l.out};
        if (!(l.out == a.q)) throw ValueError(where + ": global pool must keep its input quantization");
        break;
      case OpKind::kDense:
        need_int8(l.quantized);
        if (a.length != 1) throw ShapeError(where + ": dense expects a vector input");
        o = {false, l.channels, 1, {}};
        if (l.quantized && !(l.weight_scale > 0)) throw ValueError(where + ": non-positive weight scale");
        break;
      case OpKind::kSoftmax:
        need_int8(false);
        o = {false, a.channels, a.length, {}};
        break;
      default: throw ValueError(where + ": unknown op kind");
    }
    if (o.channels == 0 || o.length == 0) throw ShapeError(where + ": empty output");
    if (o.channels != l.channels || o.length != l.length) {
      throw ShapeError(where + ": recorded shape [" + std::to_string(l.channels) + ", " + std::to_string(l.length) +
                       "] does not match derived [" + std::to_string(o.channels) + ", " +
                       std::to_string(o.length) + "]");
    }
    if (o.int8 && !(o.q.scale > 0)) throw ValueError(where + ": non-positive output scale");
    const bool requant = l.quantized && (l.kind == OpKind::kConv || l.kind == OpKind::kDepthwise ||
                                         l.kind == OpKind::kPointwise || l.kind == OpKind::kAdd);
    if (requant && !detail::valid_multiplier(l.m0)) throw ValueError(where + ": malformed requant multiplier");
    if (requant && l.kind == OpKind::kAdd &&
        (!detail::valid_multiplier(l.m1) || std::abs(l.m0.shift - l.m1.shift) > kMaxAddShiftGap))
      throw ValueError(where + ": malformed requant multiplier");
    const std::size_t wb = detail::weight_count(l, a) * (l.quantized ? 1 : 4);
    const std::size_t bb = detail::bias_count(l) * 4;
    if (l.weight_bytes != wb || l.bias_bytes != bb)
      throw ShapeError(where + ": weight/bias sizes do not match the layer shape");
    for (const auto [off, len] : {std::pair{l.weight_offset, l.weight_bytes}, std::pair{l.bias_offset, l.bias_bytes}}) {
      if (len == 0) continue;
      if (off % 4 != 0 || std::size_t{off} + len > fm.blob.size())
        throw ShapeError(where + ": weight blob range out of bounds");
    }
    t.push_back(o);
  }
  if (fm.layers.empty() || fm.layers.back().kind != OpKind::kSoftmax || t.back().elements() != fm.classes)
    throw ShapeError("flat model must end in a softmax over " + std::to_string(fm.classes) + " classes");
  return t;
}

inline Bytes FlatModel::to_bytes() const {
  ByteWriter w;
  w.put_array(std::span<const char>(kFlatMagic, 4));
  w.put<std::uint16_t>(kFlatVersion);
  w.put<std::uint32_t>(input_len);
  w.put<std::uint16_t>(classes);
  w.put<std::uint16_t>(sequence_len);
  w.put<std::uint16_t>(lstm_hidden);
  w.put<std::uint16_t>(dense_hidden);
  w.put<double>(input.scale);
  w.put<std::int32_t>(input.zero_point);
  w.put<std::uint16_t>(static_cast<std::uint16_t>(layers.size()));
  for (const auto& l : layers) {
    w.put<std::uint8_t>(static_cast<std::uint8_t>(l.kind));
    w.put<std::uint8_t>(static_cast<std::uint8_t>((l.quantized ? 1 : 0) | (l.relu ? 2 : 0)));
    w.put<std::uint8_t>(static_cast<std::uint8_t>(l.name.size()));
    w.put_text(l.name);
    w.put<std::uint8_t>(static_cast<std::uint8_t>(l.inputs.size()));
    for (const auto id : l.inputs) w.put<std::uint16_t>(id);
    w.put<std::uint16_t>(l.channels);
    w.put<std::uint16_t>(l.length);
    w.put<std::uint16_t>(l.kernel);
    w.put<double>(l.out.scale);
    w.put<std::int32_t>(l.out.zero_point);
    for (const auto& m : {l.m0, l.m1}) {
      w.put<std::int32_t>(m.multiplier);
      w.put<std::int8_t>(static_cast<std::int8_t>(m.shift));
    }
    w.put<double>(l.weight_scale);
    w.put<std::uint32_t>(l.weight_offset);
    w.put<std::uint32_t>(l.weight_bytes);
    w.put<std::uint32_t>(l.bias_offset);
    w.put<std::uint32_t>(l.bias_bytes);
  }
  w.put<std::uint32_t>(static_cast<std::uint32_t>(blob.size()));
  w.put_bytes(blob);
  w.put_array(std::span<const float>(sequence));
  w.append_crc();
  return w.take();
}

/// Parses and validates a flat model. Structural errors carry the byte
/// offset; the checksum is verified once the layout has been read.
inline FlatModel FlatModel::from_bytes(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  const auto magic = r.get_bytes(4, "magic");
  if (!std::equal(magic.begin(), magic.end(), kFlatMagic))
    throw ParseError("bad magic, expected \"MNQ1\"", 0);
  const auto version_at = r.pos();
  if (const auto v = r.get<std::uint16_t>("version"); v != kFlatVersion)
    throw ParseError("unsupported flat model version " + std::to_string(v), version_at);
  FlatModel fm;
  fm.input_len = r.get<std::uint32_t>("input length");
  fm.classes = r.get<std::uint16_t>("classes");
  fm.sequence_len = r.get<std::uint16_t>("sequence length");
  fm.lstm_hidden = r.get<std::uint16_t>("lstm size");
  fm.dense_hidden = r.get<std::uint16_t>("dense size");
  fm.input.scale = r.get<double>("input scale");
  fm.input.zero_point = r.get<std::int32_t>("input zero point");
  const auto n = r.get<std::uint16_t>("layer count");
  for (std::size_t i = 0; i < n; ++i) {
    FlatLayer l;
    const auto kind_at = r.pos();
    const auto kind = r.get<std::uint8_t>("layer kind");
    if (kind < 1 || kind > static_cast<std::uint8_t>(OpKind::kSoftmax))
      throw ParseError("unknown layer kind " + std::to_string(kind), kind_at);
    l.kind = static_cast<OpKind>(kind);
    const auto flags = r.get<std::uint8_t>("layer flags");
    l.quantized = flags & 1;
    l.relu = flags & 2;
    l.name = r.get_text(r.get<std::uint8_t>("name length"), "layer name");
    const auto ni = r.get<std::uint8_t>("input count");
    for (std::size_t j = 0; j < ni; ++j) l.inputs.push_back(r.get<std::uint16_t>("input id"));
    l.channels = r.get<std::uint16_t>("channels");
    l.length = r.get<std::uint16_t>("length");
    l.kernel = r.get<std::uint16_t>("kernel");
    l.out.scale = r.get<double>("scale");
    l.out.zero_point = r.get<std::int32_t>("zero point");
    for (auto* m : {&l.m0, &l.m1}) {
      m->multiplier = r.get<std::int32_t>("multiplier");
      m->shift = r.get<std::int8_t>("shift");
    }
    l.weight_scale = r.get<double>("weight scale");
    l.weight_offset = r.get<std::uint32_t>("weight offset");
    l.weight_bytes = r.get<std::uint32_t>("weight size");
    l.bias_offset = r.get<std::uint32_t>("bias offset");
    l.bias_bytes = r.get<std::uint32_t>("bias size");
    fm.layers.push_back(std::move(l));
  }
  const auto blob_len = r.get<std::uint32_t>("blob size");
  const auto blob = r.get_bytes(blob_len, "weight blob");
  fm.blob.assign(blob.begin(), blob.end());
  fm.sequence = r.get_array<float>(fm.sequence_floats(), "sequence weights");
  const auto payload_end = r.pos();
  r.get<std::uint32_t>("checksum");
  if (r.remaining()) throw ParseError("trailing bytes after checksum", r.pos());
  verify_crc(bytes.first(payload_end + 4));
  resolve_tensors(fm);
  return fm;
}

// ---------------------------------------------------------------------------
// Compilation from a quantized model

namespace detail {

class FlatBuilder {
 public:
  explicit FlatBuilder(FlatModel& fm) : fm_(fm) {}

  std::uint16_t add(FlatLayer l) {
    fm_.layers.push_back(std::move(l));
    return static_cast<std::uint16_t>(fm_.layers.size());
  }

  template <typename V>
  std::pair<std::uint32_t, std::uint32_t> put(std::span<const V> values) {
    while (fm_.blob.size() % 4) fm_.blob.push_back(0);
    const auto off = static_cast<std::uint32_t>(fm_.blob.size());
    const auto* p = reinterpret_cast<const std::uint8_t*>(values.data());
    fm_.blob.insert(fm_.blob.end(), p, p + values.size_bytes());
    return {off, static_cast<std::uint32_t>(values.size_bytes())};
  }

 private:
  FlatModel& fm_;
};

struct QuantizedWeights {
  double scale = 0;
  std::vector<std::int8_t> values;
};

inline QuantizedWeights quantize_weights(const Tensor<float>& w) {
  QuantizedWeights out;
  const QuantParams q = symmetric_params(max_abs(w)).q;
  out.scale = q.scale;
  out.values.reserve(w.size());
  for (const float v : w.values()) out.values.push_back(quantize_value(v, q));
  return out;
}

inline std::vector<std::int32_t> quantize_bias(const Tensor<float>& b, double scale) {
  std::vector<std::int32_t> out;
  out.reserve(b.size());
  constexpr double lo = std::numeric_limits<std::int32_t>::min(), hi = std::numeric_limits<std::int32_t>::max();
  for (const float v : b.values()) out.push_back(static_cast<std::int32_t>(std::clamp(std::round(v / scale), lo, hi)));
  return out;
}

inline std::uint16_t narrow16(std::size_t v, const char* what) {
  if (v > 0xFFFF) throw ShapeError(std::string("flat model: ") + what + " exceeds 65535");
  return static_cast<std::uint16_t>(v);
}

}  // namespace detail

/// Lowers a quantized model to the flat layer program. Quantized blocks run
/// in integer arithmetic; float blocks are wrapped in DEQUANT ... QUANT so
/// every block boundary stays on its int8 grid, as during fine-tuning.
inline FlatModel build_flat_model(const QuantizedModel& q) {
  const auto& m = q.model;
  const auto& sim = q.sim;
  if (!m.folded) throw ValueError("flat model: batchnorm must be folded before compilation");
  if (sim.blocks.size() != m.blocks.size()) throw ShapeError("flat model: quantization settings do not cover the model");
  if (m.blocks.empty() || m.blocks.front().spec.kind == BlockKind::kPool)
    throw ShapeError("flat model: the first layer must be a convolutional block");
  const auto& cfg = m.config;
  FlatModel fm;
  fm.input_len = static_cast<std::uint32_t>(cfg.input_len);
  fm.classes = detail::narrow16(cfg.classes, "class count");
  fm.sequence_len = detail::narrow16(cfg.sequence_len, "sequence length");
  fm.lstm_hidden = detail::narrow16(cfg.lstm_hidden, "lstm size");
  fm.dense_hidden = detail::narrow16(cfg.dense_hidden, "dense size");
  fm.input = sim.input;
  detail::FlatBuilder b(fm);
  const auto names = block_names(cfg);

  struct Cur {
    std::uint16_t id;
    bool int8;
    QuantParams q;
    std::size_t ch, len;
  } cur{0, false, {}, 1, cfg.input_len};
  auto layer = [&](OpKind kind, std::string name, std::vector<std::uint16_t> in, std::size_t ch, std::size_t len) {
    FlatLayer l;
    l.kind = kind;
    l.name = std::move(name);
    l.inputs = std::move(in);
    l.channels = detail::narrow16(ch, "channel count");
    l.length = detail::narrow16(len, "length");
    return l;
  };
  auto emit_quant = [&](const std::string& name, const QuantParams& qp) {
    auto l = layer(OpKind::kQuant, name, {cur.id}, cur.ch, cur.len);
    l.out = qp;
    cur = {b.add(std::move(l)), true, qp, cur.ch, cur.len};
  };
  auto float_input = [&](const std::string& name) {
    if (!cur.int8) return cur.id;
    return b.add(layer(OpKind::kDequant, name + ".dequant", {cur.id}, cur.ch, cur.len));
  };
  // Integer conv-type layer from int8 input `in` (params qin) to params qout.
  auto int_conv = [&](OpKind kind, const std::string& name, std::uint16_t in, const QuantParams& qin,
                      std::size_t out_ch, std::size_t len, std::size_t kernel, const Tensor<float>& w,
                      const Tensor<float>* bias, const QuantParams& qout, bool relu) {
    auto l = layer(kind, name, {in}, out_ch, len);
    l.quantized = true;
    l.relu = relu;
    l.kernel = detail::narrow16(kernel, "kernel");
    l.out = qout;
    const auto qw = detail::quantize_weights(w);
    l.weight_scale = qw.scale;
    l.m0 = requant_multiplier(qin.scale, qw.scale, qout.scale);
    std::tie(l.weight_offset, l.weight_bytes) = b.put(std::span<const std::int8_t>(qw.values));
    if (bias) {
      const auto qb = detail::quantize_bias(*bias, qin.scale * qw.scale);
      std::tie(l.bias_offset, l.bias_bytes) = b.put(std::span<const std::int32_t>(qb));
    }
    return b.add(std::move(l));
  };
  auto float_conv = [&](OpKind kind, const std::string& name, std::uint16_t in, std::size_t out_ch, std::size_t len,
                        std::size_t kernel, const Tensor<float>& w, const Tensor<float>* bias, bool relu) {
    auto l = layer(kind, name, {in}, out_ch, len);
    l.relu = relu;
    l.kernel = detail::narrow16(kernel, "kernel");
    std::tie(l.weight_offset, l.weight_bytes) = b.put(w.values());
    if (bias) std::tie(l.bias_offset, l.bias_bytes) = b.put(bias->values());
    return b.add(std::move(l));
  };
  auto add_op = [&](const std::string& name, std::uint16_t a, const QuantParams* qa, std::uint16_t c,
                    const QuantParams* qc, const QuantParams* qout, std::size_t ch, std::size_t len) {
    auto l = layer(OpKind::kAdd, name, {a, c}, ch, len);
    if (qout) {
      l.quantized = true;
      l.out = *qout;
      l.m0 = requant_multiplier(qa->scale / qout->scale);
      l.m1 = requant_multiplier(qc->scale / qout->scale);
    }
    return b.add(std::move(l));
  };

  for (std::size_t i = 0; i < m.blocks.size(); ++i) {
    const auto& blk = m.blocks[i];
    const auto& bq = sim.blocks[i];
    const auto& name = names[i];
    const auto& spec = blk.spec;
    switch (spec.kind) {
      case BlockKind::kStart: {
        const std::size_t ch = spec.filters, k = spec.kernel;
        if (bq.quantized) {
          if (!cur.int8) emit_quant("input.quant", sim.input);
          cur = {int_conv(OpKind::kConv, name + ".conv", cur.id, cur.q, ch, cur.len, k, blk.conv.weight,
                          &blk.conv.bias, bq.out, true),
                 true, bq.out, ch, cur.len};
        } else {
          const auto in = float_input(name);
          cur = {float_conv(OpKind::kConv, name + ".conv", in, ch, cur.len, k, blk.conv.weight, &blk.conv.bias, true),
                 false, {}, ch, cur.len};
          emit_quant(name + ".quant", bq.out);
        }
        if (spec.pool_size) {
          auto l = layer(OpKind::kMaxPool, name + ".pool", {cur.id}, cur.ch, cur.len / spec.pool_size);
          l.kernel = detail::narrow16(spec.pool_size, "pool window");
          l.out = cur.q;
          cur = {b.add(std::move(l)), true, cur.q, cur.ch, cur.len / spec.pool_size};
        }
        break;
      }
      case BlockKind::kConvBlock:
      case BlockKind::kIdentityBlock: {
        const bool conv = spec.kind == BlockKind::kConvBlock;
        const std::size_t cin = cur.ch, cout = spec.filters, len = cur.len, k = spec.kernel;
        if (bq.quantized && !cur.int8) emit_quant("input.quant", sim.input);
        const auto x = cur;
        if (bq.quantized) {
          const auto dw = int_conv(OpKind::kDepthwise, name + ".depthwise", x.id, x.q, cin, len, k,
                                   blk.sep.depthwise, nullptr, bq.dw, false);
          const auto br = int_conv(OpKind::kPointwise, name + ".pointwise", dw, bq.dw, cout, len, 1,
                                   blk.sep.pointwise, &blk.sep.bias, bq.branch, true);
          std::uint16_t side = x.id;
          const QuantParams* qside = &x.q;
          if (conv) {
            side = int_conv(OpKind::kPointwise, name + ".residual", x.id, x.q, cout, len, 1,
                            blk.residual.weight.reshaped({cout, cin}), &blk.residual.bias, bq.residual, false);
            qside = &bq.residual;
          }
          cur = {add_op(name + ".add", br, &bq.branch, side, qside, &bq.out, cout, len), true, bq.out, cout, len};
        } else {
          const auto xf = float_input(name);
          const auto dw = float_conv(OpKind::kDepthwise, name + ".depthwise", xf, cin, len, k, blk.sep.depthwise,
                                     nullptr, false);
          const auto br = float_conv(OpKind::kPointwise, name + ".pointwise", dw, cout, len, 1, blk.sep.pointwise,
                                     &blk.sep.bias, true);
          const auto side = conv ? float_conv(OpKind::kPointwise, name + ".residual", xf, cout, len, 1,
                                              blk.residual.weight.reshaped({cout, cin}), &blk.residual.bias, false)
                                 : xf;
          cur = {add_op(name + ".add", br, nullptr, side, nullptr, nullptr, cout, len), false, {}, cout, len};
          emit_quant(name + ".quant", bq.out);
        }
        break;
      }
      case BlockKind::kPool: {
        if (!(bq.out == cur.q)) throw ValueError("flat model: pool '" + name + "' must keep its input grid");
        auto l = layer(spec.pool == PoolKind::kMax ? OpKind::kMaxPool : OpKind::kAvgPool, name, {cur.id}, cur.ch,
                       cur.len / spec.pool_size);
        l.kernel = detail::narrow16(spec.pool_size, "pool window");
        l.out = cur.q;
        cur = {b.add(std::move(l)), true, cur.q, cur.ch, cur.len / spec.pool_size};
        break;
      }
    }
  }
  {
    auto l = layer(OpKind::kGlobalAvgPool, "gap", {cur.id}, cur.ch, 1);
    l.out = cur.q;
    cur = {b.add(std::move(l)), true, cur.q, cur.ch, 1};
  }
  if (sim.head_quantized) {
    auto l = layer(OpKind::kDense, "head", {cur.id}, cfg.classes, 1);
    l.quantized = true;
    const auto qw = detail::quantize_weights(m.head.weight);
    l.weight_scale = qw.scale;
    std::tie(l.weight_offset, l.weight_bytes) = b.put(std::span<const std::int8_t>(qw.values));
    const auto qb = detail::quantize_bias(m.head.bias, cur.q.scale * qw.scale);
    std::tie(l.bias_offset, l.bias_bytes) = b.put(std::span<const std::int32_t>(qb));
    cur.id = b.add(std::move(l));
  } else {
    const auto in = float_input("head");
    auto l = layer(OpKind::kDense, "head", {in}, cfg.classes, 1);
    std::tie(l.weight_offset, l.weight_bytes) = b.put(m.head.weight.values());
    std::tie(l.bias_offset, l.bias_bytes) = b.put(m.head.bias.values());
    cur.id = b.add(std::move(l));
  }
  b.add(layer(OpKind::kSoftmax, "softmax", {cur.id}, cfg.classes, 1));

  auto& s = const_cast<SequenceLearner<float>&>(m.seq);
  for (auto& [n, p] : s.named_params()) fm.sequence.insert(fm.sequence.end(), p->values().begin(), p->values().end());
  if (fm.sequence.size() != fm.sequence_floats()) throw ShapeError("flat model: sequence learner size mismatch");
  resolve_tensors(fm);
  return fm;
}

/// Serialized flat model; refuses to exceed `max_bytes`.
inline Bytes compile_flat_model(const QuantizedModel& q, std::size_t max_bytes = kFlatModelBudget) {
  Bytes out = build_flat_model(q).to_bytes();
  if (out.size() > max_bytes) {
    throw ValueError("flat model is " + std::to_string(out.size()) + " bytes, over the " + std::to_string(max_bytes) +
                     " byte budget");
  }
  return out;
}

/// Float sequence learner carried by a flat model.
inline SequenceLearner<float> flat_sequence_learner(const FlatModel& fm) {
  SequenceLearner<float> s;
  Rng rng(0);
  MorpheusConfig cfg;
  cfg.classes = fm.classes;
  cfg.lstm_hidden = fm.lstm_hidden;
  cfg.dense_hidden = fm.dense_hidden;
  s = build_sequence_learner<float>(cfg, rng);
  std::size_t pos = 0;
  for (auto& [n, p] : s.named_params()) {
    std::copy_n(fm.sequence.begin() + static_cast<std::ptrdiff_t>(pos), p->size(), p->data());
    pos += p->size();
  }
  return s;
}

}  // namespace morpheus::runtime
