// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The MorpheusNet Authors

#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "morpheus/core/errors.hpp"

namespace morpheus::runtime {

inline constexpr std::size_t kArenaAlignment = 8;

/// Static working-memory layout. Tensor 0 is the program input and op i
/// produces tensor i + 1; a tensor is live from its producer through its last
/// consumer (the final tensor stays live to the end). Live tensors never
/// share a buffer.
struct ArenaPlan {
  std::vector<std::size_t> tensor_bytes;
  std::vector<std::size_t> first_use;  // program point of the producer
  std::vector<std::size_t> last_use;
  std::vector<std::size_t> assignment;  // tensor -> buffer
  std::vector<std::size_t> buffer_bytes;
  std::vector<std::size_t> buffer_offset;
  std::size_t peak_live_bytes = 0;  // max over program points of live tensor bytes
  std::size_t arena_bytes = 0;      // sum of (aligned) buffer sizes

  std::size_t offset_of(std::size_t tensor) const { return buffer_offset[assignment[tensor]]; }
  bool overlaps(std::size_t a, std::size_t b) const {
    return first_use[a] <= last_use[b] && first_use[b] <= last_use[a];
  }
};

inline std::size_t align_up(std::size_t n, std::size_t a = kArenaAlignment) { return (n + a - 1) / a * a; }

/// Liveness-based buffer reuse. Buffers released by dead tensors are reused
/// best-fit (growing the largest free one when none fits), so a plain chain
/// alternates between two buffers.
inline ArenaPlan plan_memory(std::span<const std::size_t> tensor_bytes,
                             std::span<const std::vector<std::size_t>> op_inputs) {
  const std::size_t nt = tensor_bytes.size();
  if (nt != op_inputs.size() + 1) throw ShapeError("plan_memory: need one tensor per op plus the input");
  ArenaPlan p;
  p.tensor_bytes.assign(tensor_bytes.begin(), tensor_bytes.end());
  p.first_use.resize(nt);
  p.last_use.resize(nt);
  for (std::size_t t = 0; t < nt; ++t) p.first_use[t] = p.last_use[t] = t;
  for (std::size_t i = 0; i < op_inputs.size(); ++i) {
    for (const auto in : op_inputs[i]) {
      if (in > i) throw ShapeError("plan_memory: op " + std::to_string(i) + " reads a tensor produced later");
      p.last_use[in] = std::max(p.last_use[in], i + 1);
    }
  }
  p.last_use[nt - 1] = nt;  // program output

  for (std::size_t time = 0; time <= nt; ++time) {
    std::size_t live = 0;
    for (std::size_t t = 0; t < nt; ++t)
      if (p.first_use[t] <= time && time <= p.last_use[t]) live += p.tensor_bytes[t];
    p.peak_live_bytes = std::max(p.peak_live_bytes, live);
  }

  constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> owner;  // buffer -> tensor currently held
  p.assignment.assign(nt, kNone);
  for (std::size_t t = 0; t < nt; ++t) {
    const std::size_t need = align_up(std::max<std::size_t>(p.tensor_bytes[t], 1));
    std::size_t best = kNone, largest = kNone;
    for (std::size_t b = 0; b < p.buffer_bytes.size(); ++b) {
      if (p.last_use[owner[b]] >= t) continue;  // still live at this producer
      if (p.buffer_bytes[b] >= need && (best == kNone || p.buffer_bytes[b] < p.buffer_bytes[best])) best = b;
      if (largest == kNone || p.buffer_bytes[b] > p.buffer_bytes[largest]) largest = b;
    }
    if (best == kNone && largest != kNone) {
      best = largest;
      p.buffer_bytes[best] = need;
    }
    if (best == kNone) {
      best = p.buffer_bytes.size();
      p.buffer_bytes.push_back(need);
      owner.push_back(t);
    }
    owner[best] = t;
    p.assignment[t] = best;
  }
  std::size_t off = 0;
  for (const auto bytes : p.buffer_bytes) {
    p.buffer_offset.push_back(off);
    off += bytes;
  }
  p.arena_bytes = off;
  return p;
}

}  // namespace morpheus::runtime
