// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The MorpheusNet Authors

#pragma once

#include "morpheus/model/config.hpp"

namespace morpheus::oracle {

// Closed-form trainable-scalar count straight from the layer list.
inline std::size_t counted_params(const MorpheusConfig& c) {
  std::size_t ch = 1, n = 0;
  for (const auto& l : c.layers) {
    const std::size_t f = l.filters, k = l.kernel;
    switch (l.kind) {
      case BlockKind::kStart: n += f * ch * k + f + 2 * f; break;
      case BlockKind::kConvBlock: n += ch * k + f * ch + f + (f * ch + f) + 2 * f; break;
      case BlockKind::kIdentityBlock: n += ch * k + f * ch + f + 2 * f; break;
      case BlockKind::kPool: continue;
    }
    ch = f;
  }
  n += ch * c.classes + c.classes;
  const std::size_t H = c.lstm_hidden, D = c.dense_hidden;
  n += 4 * (H * (c.classes + H) + H) + (H * D + D) + (D * c.classes + c.classes);
  return n;
}

}  // namespace morpheus::oracle
