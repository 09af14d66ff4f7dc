// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The MorpheusNet Authors

#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "morpheus/runtime/stream.hpp"

namespace morpheus::runtime {

struct LayerMacs {
  std::string layer;
  std::uint64_t macs = 0;
};

/// Analytic multiply-accumulate counts: conv C_out*C_in*k*L_out, depthwise
/// C*k*L_out, pointwise C_in*C_out*L_out, dense m*n, LSTM 4h(i+h) per step.
/// Data-movement layers (quantize, pools, add, softmax) count zero.
inline std::vector<LayerMacs> layer_macs(const FlatModel& fm) {
  const auto t = resolve_tensors(fm);
  std::vector<LayerMacs> out;
  for (std::size_t i = 0; i < fm.layers.size(); ++i) {
    const auto& l = fm.layers[i];
    const auto& in = t[l.inputs[0]];
    const std::uint64_t co = l.channels, ci = in.channels, k = l.kernel, lo = l.length;
    std::uint64_t m = 0;
    switch (l.kind) {
      case OpKind::kConv: m = co * ci * k * lo; break;
      case OpKind::kDepthwise: m = ci * k * lo; break;
      case OpKind::kPointwise: m = ci * co * lo; break;
      case OpKind::kDense: m = co * ci; break;
      default: continue;
    }
    out.push_back({l.name, m});
  }
  const std::uint64_t K = fm.classes, H = fm.lstm_hidden, D = fm.dense_hidden, steps = fm.sequence_len;
  out.push_back({"seq.lstm", steps * 4 * H * (K + H)});
  out.push_back({"seq.hidden", D * H});
  out.push_back({"seq.output", K * D});
  return out;
}

struct ProfileReport {
  std::vector<LayerMacs> macs_per_layer;
  std::uint64_t macs_total = 0;
  std::size_t peak_arena_bytes = 0;
  std::size_t model_bytes = 0;
  std::size_t runs = 0;
  double latency_ms_median = 0;
  double latency_ms_p95 = 0;
  std::vector<double> latencies_ms;

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["macs_total"] = macs_total;
    j["macs_per_layer"] = nlohmann::ordered_json::array();
    for (const auto& e : macs_per_layer) j["macs_per_layer"].push_back({{"layer", e.layer}, {"macs", e.macs}});
    j["peak_arena_bytes"] = peak_arena_bytes;
    j["model_bytes"] = model_bytes;
    j["latency_ms_median"] = latency_ms_median;
    j["latency_ms_p95"] = latency_ms_p95;
    return j;
  }
};

inline double median_of(std::vector<double> v) {
  if (v.empty()) return 0;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

/// Nearest-rank percentile, p in (0, 100].
inline double percentile_of(std::vector<double> v, double p) {
  if (v.empty()) return 0;
  std::sort(v.begin(), v.end());
  const auto rank = static_cast<std::size_t>(std::ceil(p / 100.0 * static_cast<double>(v.size())));
  return v[std::clamp<std::size_t>(rank, 1, v.size()) - 1];
}

/// Times `runs` single-epoch pipeline steps (int8 CNN plus sequence learner)
/// cycling over `inputs` [n, 1, L].
inline ProfileReport profile(StreamEngine& s, const Tensor<float>& inputs, std::size_t runs, std::size_t model_bytes) {
  if (runs == 0) throw ValueError("profile: runs must be at least 1");
  const std::size_t L = s.engine().input_len();
  if (inputs.empty() || inputs.size() % L) throw ShapeError("profile: inputs must be whole epochs");
  const std::size_t n = inputs.size() / L;
  ProfileReport r;
  r.macs_per_layer = layer_macs(s.engine().model());
  for (const auto& e : r.macs_per_layer) r.macs_total += e.macs;
  r.peak_arena_bytes = s.engine().plan().arena_bytes;
  r.model_bytes = model_bytes;
  r.runs = runs;
  s.reset();
  s.push(std::span<const float>(inputs.data(), L));  // warm-up
  for (std::size_t i = 0; i < runs; ++i) {
    const std::span<const float> e(inputs.data() + (i % n) * L, L);
    const auto t0 = std::chrono::steady_clock::now();
    s.push(e);
    const auto t1 = std::chrono::steady_clock::now();
    r.latencies_ms.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
  }
  r.latency_ms_median = median_of(r.latencies_ms);
  r.latency_ms_p95 = percentile_of(r.latencies_ms, 95);
  s.reset();
  return r;
}

}  // namespace morpheus::runtime
