// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The MorpheusNet Authors

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "morpheus/core/tensor.hpp"

namespace morpheus {

inline constexpr int kQMin = -128;
inline constexpr int kQMax = 127;
inline constexpr double kMinScale = 1e-8;

/// Affine int8 mapping real = scale * (q - zero_point).
struct QuantParams {
  double scale = 1.0;
  int zero_point = 0;
  static constexpr int bits = 8;

  bool operator==(const QuantParams&) const = default;
};

struct RangeParams {
  QuantParams q;
  bool floored = false;  // range was degenerate and the scale floor applied
};

/// Symmetric weight scale max|w| / 127, zero point 0.
inline RangeParams symmetric_params(double max_abs) {
  double scale = std::abs(max_abs) / 127.0;
  const bool floored = !(scale >= kMinScale);
  if (floored) scale = kMinScale;
  return {{scale, 0}, floored};
}

/// Asymmetric activation mapping of [min, max] (widened to contain 0) onto
/// [-128, 127].
inline RangeParams asymmetric_params(double lo, double hi) {
  lo = std::min(lo, 0.0);
  hi = std::max(hi, 0.0);
  double scale = (hi - lo) / 255.0;
  const bool floored = !(scale >= kMinScale);
  if (floored) scale = kMinScale;
  const double zp = std::round(-128.0 - lo / scale);
  return {{scale, static_cast<int>(std::clamp(zp, double(kQMin), double(kQMax)))}, floored};
}

inline int quantize_unclamped(double x, const QuantParams& q) {
  const double v = std::round(x / q.scale) + q.zero_point;
  // Beyond int range the clamp result is the same; avoid UB on the cast.
  return static_cast<int>(std::clamp(v, -1e9, 1e9));
}

inline std::int8_t quantize_value(double x, const QuantParams& q) {
  return static_cast<std::int8_t>(std::clamp(quantize_unclamped(x, q), kQMin, kQMax));
}

inline double dequantize_value(int q, const QuantParams& p) {
  return p.scale * static_cast<double>(q - p.zero_point);
}

struct QuantizedTensor {
  Shape shape;
  std::vector<std::int8_t> values;
  QuantParams qparams;
};

template <typename T>
QuantizedTensor quantize_tensor(const Tensor<T>& x, const QuantParams& q) {
  if (!(q.scale > 0)) throw ValueError("quantize: scale must be positive");
  QuantizedTensor out{x.shape(), std::vector<std::int8_t>(x.size()), q};
  for (std::size_t i = 0; i < x.size(); ++i) out.values[i] = quantize_value(x[i], q);
  return out;
}

template <typename T = float>
Tensor<T> dequantize(const QuantizedTensor& qt) {
  Tensor<T> out(qt.shape);
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = static_cast<T>(dequantize_value(qt.values[i], qt.qparams));
  return out;
}

/// dequantize(quantize(x)) in one pass.
template <typename T>
Tensor<T> fake_quantize(const Tensor<T>& x, const QuantParams& q) {
  if (!(q.scale > 0)) throw ValueError("fake_quantize: scale must be positive");
  Tensor<T> out(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i)
    out[i] = static_cast<T>(dequantize_value(quantize_value(x[i], q), q));
  return out;
}

/// Straight-through estimator: upstream gradient where x quantizes inside
/// [-128, 127], zero where it saturates.
template <typename T>
Tensor<T> fake_quantize_backward(const Tensor<T>& x, const QuantParams& q, const Tensor<T>& dy) {
  if (x.shape() != dy.shape()) throw ShapeError("fake_quantize_backward: shape mismatch");
  Tensor<T> dx(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const int v = quantize_unclamped(x[i], q);
    dx[i] = (v >= kQMin && v <= kQMax) ? dy[i] : T(0);
  }
  return dx;
}

template <typename T>
double max_abs(const Tensor<T>& x) {
  double m = 0;
  for (T v : x.values()) m = std::max(m, std::abs(static_cast<double>(v)));
  return m;
}

/// Symmetric per-tensor fake quantization of a weight tensor.
template <typename T>
Tensor<T> fake_quantize_weight(const Tensor<T>& w) {
  return fake_quantize(w, symmetric_params(max_abs(w)).q);
}

/// Fixed-point encoding of a positive real ratio:
/// real ~= multiplier * 2^(shift - 31), multiplier in [2^30, 2^31).
struct RequantMultiplier {
  std::int32_t multiplier = 1 << 30;
  int shift = 0;

  double value() const { return std::ldexp(static_cast<double>(multiplier), shift - 31); }
  bool operator==(const RequantMultiplier&) const = default;
};

inline RequantMultiplier requant_multiplier(double real) {
  if (!(real > 0) || !std::isfinite(real)) {
    throw ValueError("requant_multiplier: ratio must be positive and finite");
  }
  int exp = 0;
  const double frac = std::frexp(real, &exp);  // real = frac * 2^exp, frac in [0.5, 1)
  auto m = static_cast<std::int64_t>(std::round(std::ldexp(frac, 31)));
  if (m == (std::int64_t{1} << 31)) {
    m >>= 1;
    ++exp;
  }
  if (exp > 31) throw ValueError("requant_multiplier: ratio too large for int32 fixed point");
  return {static_cast<std::int32_t>(m), exp};
}

inline RequantMultiplier requant_multiplier(double scale_in, double scale_w, double scale_out) {
  if (!(scale_in > 0) || !(scale_w > 0) || !(scale_out > 0)) {
    throw ValueError("requant_multiplier: scales must be positive");
  }
  return requant_multiplier(scale_in * scale_w / scale_out);
}

/// round(v / 2^bits), half away from zero; bits <= 0 shifts left.
inline std::int64_t rounding_shift(std::int64_t v, int bits) {
  if (bits <= 0) return v << -bits;
  if (bits >= 63) return 0;
  const bool neg = v < 0;
  const auto mag = static_cast<std::uint64_t>(neg ? -v : v);
  const std::uint64_t rounded = (mag + (std::uint64_t{1} << (bits - 1))) >> bits;
  return neg ? -static_cast<std::int64_t>(rounded) : static_cast<std::int64_t>(rounded);
}

/// round(v * multiplier * 2^(shift - 31)), half away from zero, in integer
/// arithmetic only.
inline std::int64_t apply_multiplier(std::int64_t v, const RequantMultiplier& r) {
  return rounding_shift(v * static_cast<std::int64_t>(r.multiplier), 31 - r.shift);
}

/// Largest shift gap add_multiplied() accepts without int64 overflow
/// (operands within 9 bits, multipliers within 31).
inline constexpr int kMaxAddShiftGap = 23;

/// round(a * ra + b * rb) with a single rounding step, half away from zero.
inline std::int64_t add_multiplied(std::int64_t a, const RequantMultiplier& ra, std::int64_t b,
                                   const RequantMultiplier& rb) {
  if (std::abs(ra.shift - rb.shift) > kMaxAddShiftGap) throw ValueError("add_multiplied: operand scales too far apart");
  const int e = std::min(ra.shift, rb.shift);
  const std::int64_t sum = ((a * ra.multiplier) << (ra.shift - e)) + ((b * rb.multiplier) << (rb.shift - e));
  return rounding_shift(sum, 31 - e);
}

inline std::int8_t saturate_int8(std::int64_t v) {
  return static_cast<std::int8_t>(std::clamp<std::int64_t>(v, kQMin, kQMax));
}

/// Integer mean rounded half away from zero.
inline std::int64_t rounded_div(std::int64_t num, std::int64_t den) {
  const bool neg = (num < 0) != (den < 0);
  const std::int64_t a = num < 0 ? -num : num, b = den < 0 ? -den : den;
  const std::int64_t q = (2 * a + b) / (2 * b);
  return neg ? -q : q;
}

}  // namespace morpheus
