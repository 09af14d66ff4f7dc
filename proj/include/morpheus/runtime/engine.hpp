// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The MorpheusNet Authors

#pragma once

#include <algorithm>
#include <cmath>
#include <cstring>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "morpheus/runtime/arena.hpp"
#include "morpheus/runtime/flat_model.hpp"

namespace morpheus::runtime {

/// Read-only view of one tensor in the arena.
struct TensorView {
  const TensorInfo* info = nullptr;
  const std::int8_t* i8 = nullptr;
  const float* f32 = nullptr;

  std::span<const std::int8_t> int8_values() const { return {i8, i8 ? info->elements() : 0}; }
  std::span<const float> float_values() const { return {f32, f32 ? info->elements() : 0}; }
};

/// Executes a flat model's CNN program. All working memory is acquired when
/// the engine is built; infer() performs no further allocation.
class Engine {
 public:
  /// Called after every layer with the layer index and its output.
  using Observer = std::function<void(std::size_t, const TensorView&)>;

  explicit Engine(FlatModel model) : model_(std::move(model)) {
    tensors_ = resolve_tensors(model_);
    std::vector<std::size_t> bytes;
    for (const auto& t : tensors_) bytes.push_back(t.bytes());
    std::vector<std::vector<std::size_t>> inputs;
    for (const auto& l : model_.layers) inputs.emplace_back(l.inputs.begin(), l.inputs.end());
    plan_ = plan_memory(bytes, inputs);
    arena_ = std::make_unique<std::uint64_t[]>(plan_.arena_bytes / sizeof(std::uint64_t) + 1);
    ++acquisitions_;
    kernels_.resize(model_.layers.size());
    for (std::size_t i = 0; i < model_.layers.size(); ++i) load_kernel(i);
  }

  static Engine from_bytes(std::span<const std::uint8_t> bytes) { return Engine(FlatModel::from_bytes(bytes)); }

  const FlatModel& model() const noexcept { return model_; }
  const ArenaPlan& plan() const noexcept { return plan_; }
  std::span<const TensorInfo> tensors() const noexcept { return tensors_; }
  std::size_t classes() const noexcept { return model_.classes; }
  std::size_t input_len() const noexcept { return model_.input_len; }
  /// Working buffers acquired so far; fixed after construction.
  std::size_t buffer_acquisitions() const noexcept { return acquisitions_; }

  void set_observer(Observer o) { observer_ = std::move(o); }

  /// Stage probabilities for one float epoch. The span points into the arena
  /// and stays valid until the next call.
  std::span<const float> infer(std::span<const float> epoch) {
    if (epoch.size() != model_.input_len) {
      throw ShapeError("epoch has " + std::to_string(epoch.size()) + " samples, model expects " +
                       std::to_string(model_.input_len));
    }
    for (const float v : epoch)
      if (!std::isfinite(v)) throw ValueError("epoch contains a non-finite sample");
    std::memcpy(f32(0), epoch.data(), epoch.size_bytes());
    for (std::size_t i = 0; i < model_.layers.size(); ++i) {
      run(i);
      if (observer_) observer_(i, view(i + 1));
    }
    return {f32(tensors_.size() - 1), model_.classes};
  }

  TensorView view(std::size_t tensor) {
    const auto& t = tensors_[tensor];
    return t.int8 ? TensorView{&t, i8(tensor), nullptr} : TensorView{&t, nullptr, f32(tensor)};
  }

 private:
  struct Kernel {
    std::vector<std::int8_t> w8;
    std::vector<std::int32_t> b32;
    std::vector<float> wf;
    std::vector<float> bf;
  };

  std::uint8_t* base(std::size_t t) { return reinterpret_cast<std::uint8_t*>(arena_.get()) + plan_.offset_of(t); }
  std::int8_t* i8(std::size_t t) { return reinterpret_cast<std::int8_t*>(base(t)); }
  float* f32(std::size_t t) { return reinterpret_cast<float*>(base(t)); }

  template <typename V>
  std::vector<V> slice(std::uint32_t off, std::uint32_t len) const {
    std::vector<V> out(len / sizeof(V));
    std::memcpy(out.data(), model_.blob.data() + off, len);
    return out;
  }

  void load_kernel(std::size_t i) {
    const auto& l = model_.layers[i];
    auto& k = kernels_[i];
    if (l.quantized) {
      k.w8 = slice<std::int8_t>(l.weight_offset, l.weight_bytes);
      k.b32 = slice<std::int32_t>(l.bias_offset, l.bias_bytes);
    } else {
      k.wf = slice<float>(l.weight_offset, l.weight_bytes);
      k.bf = slice<float>(l.bias_offset, l.bias_bytes);
    }
  }

  static std::int8_t requant(std::int64_t acc, const FlatLayer& l) {
    std::int64_t v = apply_multiplier(acc, l.m0) + l.out.zero_point;
    if (l.relu) v = std::max<std::int64_t>(v, l.out.zero_point);
    return saturate_int8(v);
  }

  void run(std::size_t i) {
    const auto& l = model_.layers[i];
    const auto& k = kernels_[i];
    const std::size_t a = l.inputs[0], o = i + 1;
    const TensorInfo& ti = tensors_[a];
    const std::size_t C = ti.channels, L = ti.length, Co = l.channels;
    switch (l.kind) {
      case OpKind::kQuant: {
        const float* x = f32(a);
        std::int8_t* y = i8(o);
        for (std::size_t j = 0; j < ti.elements(); ++j) y[j] = quantize_value(x[j], l.out);
        break;
      }
      case OpKind::kDequant: {
        const std::int8_t* x = i8(a);
        float* y = f32(o);
        for (std::size_t j = 0; j < ti.elements(); ++j) y[j] = static_cast<float>(dequantize_value(x[j], ti.q));
        break;
      }
      case OpKind::kConv:
        if (l.quantized) conv_int(l, k, i8(a), ti, i8(o));
        else conv_float(l, k, f32(a), ti, f32(o));
        break;
      case OpKind::kDepthwise:
        if (l.quantized) depthwise_int(l, k, i8(a), ti, i8(o));
        else depthwise_float(l, k, f32(a), ti, f32(o));
        break;
      case OpKind::kPointwise:
        if (l.quantized) {
          const std::int8_t* x = i8(a);
          std::int8_t* y = i8(o);
          const int zx = ti.q.zero_point;
          for (std::size_t co = 0; co < Co; ++co) {
            const std::int8_t* w = k.w8.data() + co * C;
            for (std::size_t t = 0; t < L; ++t) {
              std::int64_t acc = k.b32[co];
              for (std::size_t c = 0; c < C; ++c) acc += std::int64_t{w[c]} * (x[c * L + t] - zx);
              y[co * L + t] = requant(acc, l);
            }
          }
        } else {
          const float* x = f32(a);
          float* y = f32(o);
          for (std::size_t co = 0; co < Co; ++co) {
            const float* w = k.wf.data() + co * C;
            for (std::size_t t = 0; t < L; ++t) {
              float acc = k.bf[co];
              for (std::size_t c = 0; c < C; ++c) acc += w[c] * x[c * L + t];
              y[co * L + t] = l.relu ? std::max(acc, 0.0f) : acc;
            }
          }
        }
        break;
      case OpKind::kAdd: {
        const std::size_t b = l.inputs[1], n = ti.elements();
        if (l.quantized) {
          const std::int8_t *x = i8(a), *z = i8(b);
          std::int8_t* y = i8(o);
          const int za = ti.q.zero_point, zb = tensors_[b].q.zero_point;
          for (std::size_t j = 0; j < n; ++j) {
            y[j] = saturate_int8(add_multiplied(x[j] - za, l.m0, z[j] - zb, l.m1) + l.out.zero_point);
          }
        } else {
          const float *x = f32(a), *z = f32(b);
          float* y = f32(o);
          for (std::size_t j = 0; j < n; ++j) y[j] = x[j] + z[j];
        }
        break;
      }
      case OpKind::kMaxPool:
      case OpKind::kAvgPool: {
        const std::int8_t* x = i8(a);
        std::int8_t* y = i8(o);
        const std::size_t w = l.kernel, Lo = L / w;
        const int z = ti.q.zero_point;
        for (std::size_t c = 0; c < C; ++c)
          for (std::size_t t = 0; t < Lo; ++t) {
            const std::int8_t* win = x + c * L + t * w;
            if (l.kind == OpKind::kMaxPool) {
              y[c * Lo + t] = *std::max_element(win, win + w);
            } else {
              std::int64_t s = 0;
              for (std::size_t j = 0; j < w; ++j) s += win[j] - z;
              y[c * Lo + t] = saturate_int8(rounded_div(s, static_cast<std::int64_t>(w)) + z);
            }
          }
        break;
      }
      case OpKind::kGlobalAvgPool: {
        const std::int8_t* x = i8(a);
        std::int8_t* y = i8(o);
        const int z = ti.q.zero_point;
        for (std::size_t c = 0; c < C; ++c) {
          std::int64_t s = 0;
          for (std::size_t t = 0; t < L; ++t) s += x[c * L + t] - z;
          y[c] = saturate_int8(rounded_div(s, static_cast<std::int64_t>(L)) + z);
        }
        break;
      }
      case OpKind::kDense: {
        float* y = f32(o);
        if (l.quantized) {
          const std::int8_t* x = i8(a);
          const int zx = ti.q.zero_point;
          const double s = ti.q.scale * l.weight_scale;
          for (std::size_t r = 0; r < Co; ++r) {
            std::int64_t acc = k.b32[r];
            for (std::size_t c = 0; c < C; ++c) acc += std::int64_t{k.w8[r * C + c]} * (x[c] - zx);
            y[r] = static_cast<float>(static_cast<double>(acc) * s);
          }
        } else {
          const float* x = f32(a);
          for (std::size_t r = 0; r < Co; ++r) {
            float acc = k.bf[r];
            for (std::size_t c = 0; c < C; ++c) acc += k.wf[r * C + c] * x[c];
            y[r] = acc;
          }
        }
        break;
      }
      case OpKind::kSoftmax: {
        const float* x = f32(a);
        float* y = f32(o);
        const std::size_t n = ti.elements();
        const float mx = *std::max_element(x, x + n);
        float sum = 0;
        for (std::size_t j = 0; j < n; ++j) {
          y[j] = std::exp(x[j] - mx);
          sum += y[j];
        }
        for (std::size_t j = 0; j < n; ++j) y[j] /= sum;
        break;
      }
    }
  }

  // Same-padding tap range: output t reads input t + j - pad for j in [lo, hi).
  static std::pair<std::size_t, std::size_t> taps(std::size_t t, std::size_t K, std::size_t L) {
    const auto pad = static_cast<std::ptrdiff_t>((K - 1) / 2);
    const auto tt = static_cast<std::ptrdiff_t>(t);
    const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, pad - tt);
    const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(K), static_cast<std::ptrdiff_t>(L) + pad - tt);
    return {static_cast<std::size_t>(lo), static_cast<std::size_t>(std::max(lo, hi))};
  }

  void conv_int(const FlatLayer& l, const Kernel& k, const std::int8_t* x, const TensorInfo& ti, std::int8_t* y) const {
    const std::size_t C = ti.channels, L = ti.length, K = l.kernel, pad = (K - 1) / 2;
    const int zx = ti.q.zero_point;
    for (std::size_t co = 0; co < l.channels; ++co)
      for (std::size_t t = 0; t < L; ++t) {
        const auto [lo, hi] = taps(t, K, L);
        std::int64_t acc = k.b32[co];
        for (std::size_t c = 0; c < C; ++c) {
          const std::int8_t* w = k.w8.data() + (co * C + c) * K;
          const std::int8_t* xr = x + c * L + (t + lo - pad);
          std::int32_t part = 0;
          for (std::size_t j = lo; j < hi; ++j) part += std::int32_t{w[j]} * (xr[j - lo] - zx);
          acc += part;
        }
        y[co * L + t] = requant(acc, l);
      }
  }

  void conv_float(const FlatLayer& l, const Kernel& k, const float* x, const TensorInfo& ti, float* y) const {
    const std::size_t C = ti.channels, L = ti.length, K = l.kernel, pad = (K - 1) / 2;
    for (std::size_t co = 0; co < l.channels; ++co)
      for (std::size_t t = 0; t < L; ++t) {
        const auto [lo, hi] = taps(t, K, L);
        float acc = k.bf[co];
        for (std::size_t c = 0; c < C; ++c) {
          const float* w = k.wf.data() + (co * C + c) * K;
          const float* xr = x + c * L + (t + lo - pad);
          for (std::size_t j = lo; j < hi; ++j) acc += w[j] * xr[j - lo];
        }
        y[co * L + t] = l.relu ? std::max(acc, 0.0f) : acc;
      }
  }

  void depthwise_int(const FlatLayer& l, const Kernel& k, const std::int8_t* x, const TensorInfo& ti,
                     std::int8_t* y) const {
    const std::size_t C = ti.channels, L = ti.length, K = l.kernel, pad = (K - 1) / 2;
    const int zx = ti.q.zero_point;
    for (std::size_t c = 0; c < C; ++c) {
      const std::int8_t* w = k.w8.data() + c * K;
      for (std::size_t t = 0; t < L; ++t) {
        const auto [lo, hi] = taps(t, K, L);
        const std::int8_t* xr = x + c * L + (t + lo - pad);
        std::int64_t acc = 0;
        for (std::size_t j = lo; j < hi; ++j) acc += std::int32_t{w[j]} * (xr[j - lo] - zx);
        y[c * L + t] = requant(acc, l);
      }
    }
  }

  void depthwise_float(const FlatLayer& l, const Kernel& k, const float* x, const TensorInfo& ti, float* y) const {
    const std::size_t C = ti.channels, L = ti.length, K = l.kernel, pad = (K - 1) / 2;
    for (std::size_t c = 0; c < C; ++c) {
      const float* w = k.wf.data() + c * K;
      for (std::size_t t = 0; t < L; ++t) {
        const auto [lo, hi] = taps(t, K, L);
        const float* xr = x + c * L + (t + lo - pad);
        float acc = 0;
        for (std::size_t j = lo; j < hi; ++j) acc += w[j] * xr[j - lo];
        y[c * L + t] = l.relu ? std::max(acc, 0.0f) : acc;
      }
    }
  }

  FlatModel model_;
  std::vector<TensorInfo> tensors_;
  ArenaPlan plan_;
  std::unique_ptr<std::uint64_t[]> arena_;
  std::vector<Kernel> kernels_;
  Observer observer_;
  std::size_t acquisitions_ = 0;
};

}  // namespace morpheus::runtime
