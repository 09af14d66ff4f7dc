// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The MorpheusNet Authors

#pragma once

#include <string>
#include <vector>

#include "morpheus/ops/pool.hpp"
#include "morpheus/util/kv.hpp"

namespace morpheus {

enum class BlockKind { kStart, kConvBlock, kIdentityBlock, kPool };

inline const char* to_string(BlockKind k) {
  switch (k) {
    case BlockKind::kStart: return "start";
    case BlockKind::kConvBlock: return "conv_block";
    case BlockKind::kIdentityBlock: return "identity_block";
    case BlockKind::kPool: return "pool";
  }
  return "?";
}

/// One entry of the CNN layer list. A start block may carry its own max pool
/// (`pool_size` > 0); pool layers use `pool` and `pool_size` only.
struct LayerSpec {
  BlockKind kind = BlockKind::kStart;
  std::size_t filters = 0;
  std::size_t kernel = 0;
  PoolKind pool = PoolKind::kMax;
  std::size_t pool_size = 0;

  bool operator==(const LayerSpec&) const = default;

  static LayerSpec start(std::size_t filters, std::size_t kernel, std::size_t pool_size = 4) {
    return {BlockKind::kStart, filters, kernel, PoolKind::kMax, pool_size};
  }
  static LayerSpec conv_block(std::size_t filters, std::size_t kernel) {
    return {BlockKind::kConvBlock, filters, kernel, PoolKind::kMax, 0};
  }
  static LayerSpec identity_block(std::size_t filters, std::size_t kernel) {
    return {BlockKind::kIdentityBlock, filters, kernel, PoolKind::kMax, 0};
  }
  static LayerSpec pooling(PoolKind kind, std::size_t size) {
    return {BlockKind::kPool, 0, 0, kind, size};
  }
};

struct MorpheusConfig {
  std::size_t input_len = 3000;
  std::vector<LayerSpec> layers;
  std::size_t classes = 5;
  std::size_t lstm_hidden = 32;
  std::size_t dense_hidden = 32;
  double dropout = 0.2;
  std::size_t sequence_len = 12;

  bool operator==(const MorpheusConfig&) const = default;

  static MorpheusConfig defaults() {
    MorpheusConfig c;
    c.layers = {LayerSpec::start(16, 32, 4),
                LayerSpec::conv_block(32, 8),
                LayerSpec::pooling(PoolKind::kMax, 4),
                LayerSpec::identity_block(32, 8),
                LayerSpec::conv_block(64, 8),
                LayerSpec::pooling(PoolKind::kAvg, 4),
                LayerSpec::identity_block(64, 8)};
    return c;
  }

  /// Channel count and length after each layer; throws when the chain does
  /// not fit `input_len`.
  std::vector<std::pair<std::size_t, std::size_t>> trace_shapes() const {
    if (layers.empty()) throw ValueError("config: empty layer list");
    if (classes < 2) throw ValueError("config: need at least 2 classes");
    std::vector<std::pair<std::size_t, std::size_t>> out;
    std::size_t ch = 1, len = input_len;
    for (std::size_t i = 0; i < layers.size(); ++i) {
      const auto& l = layers[i];
      const std::string where = "config layer " + std::to_string(i) + " (" + to_string(l.kind) + ")";
      if (l.kind != BlockKind::kPool && (l.filters == 0 || l.kernel == 0)) {
        throw ValueError(where + ": filters and kernel must be positive");
      }
      switch (l.kind) {
        case BlockKind::kStart:
          ch = l.filters;
          if (l.pool_size) len /= l.pool_size;
          break;
        case BlockKind::kConvBlock: ch = l.filters; break;
        case BlockKind::kIdentityBlock:
          if (l.filters != ch) {
            throw ShapeError(where + ": identity residual needs " + std::to_string(ch) +
                             " filters, got " + std::to_string(l.filters));
          }
          break;
        case BlockKind::kPool:
          if (l.pool_size == 0) throw ValueError(where + ": pool size must be positive");
          len /= l.pool_size;
          break;
      }
      if (len == 0) throw ShapeError(where + ": sequence length shrinks to zero");
      out.emplace_back(ch, len);
    }
    return out;
  }

  void validate() const {
    if (sequence_len == 0) throw ValueError("config: sequence_len must be positive");
    if (!(dropout >= 0 && dropout < 1)) throw ValueError("config: dropout must be in [0, 1)");
    if (lstm_hidden == 0 || dense_hidden == 0) throw ValueError("config: hidden sizes must be positive");
    trace_shapes();
  }

  KeyValues to_kv() const {
    KeyValues kv;
    kv.set("input_len", std::to_string(input_len));
    kv.set("classes", std::to_string(classes));
    kv.set("lstm_hidden", std::to_string(lstm_hidden));
    kv.set("dense_hidden", std::to_string(dense_hidden));
    kv.set("dropout", format_number(dropout));
    kv.set("sequence_len", std::to_string(sequence_len));
    for (const auto& l : layers) {
      std::string v = to_string(l.kind);
      if (l.kind == BlockKind::kPool) {
        v += std::string(" ") + morpheus::to_string(l.pool) + " " + std::to_string(l.pool_size);
      } else {
        v += " " + std::to_string(l.filters) + " " + std::to_string(l.kernel);
        if (l.kind == BlockKind::kStart) v += " " + std::to_string(l.pool_size);
      }
      kv.set("layer", v);
    }
    return kv;
  }

  std::string to_text() const { return to_kv().to_string(); }

  /// Reads the keys written by to_kv(); unrelated keys are ignored so the
  /// same file can carry search logs or training settings.
  static MorpheusConfig from_kv(const KeyValues& kv) {
    MorpheusConfig c;
    c.input_len = kv.number_or<std::size_t>("input_len", c.input_len);
    c.classes = kv.number_or<std::size_t>("classes", c.classes);
    c.lstm_hidden = kv.number_or<std::size_t>("lstm_hidden", c.lstm_hidden);
    c.dense_hidden = kv.number_or<std::size_t>("dense_hidden", c.dense_hidden);
    c.dropout = kv.number_or<double>("dropout", c.dropout);
    c.sequence_len = kv.number_or<std::size_t>("sequence_len", c.sequence_len);
    for (const auto& [key, value] : kv.entries()) {
      if (key != "layer") continue;
      c.layers.push_back(parse_layer(value));
    }
    c.validate();
    return c;
  }

  static MorpheusConfig from_text(std::string_view text) { return from_kv(KeyValues::parse(text)); }

  static LayerSpec parse_layer(const std::string& value) {
    const auto tok = split_ws(value);
    auto num = [&](std::size_t i) {
      if (i >= tok.size()) throw ValueError("layer '" + value + "': missing field");
      return KeyValues::to_number<std::size_t>(tok[i], "layer");
    };
    if (tok.empty()) throw ValueError("empty layer entry");
    const std::string& kind = tok[0];
    if (kind == "start") {
      return LayerSpec::start(num(1), num(2), tok.size() > 3 ? num(3) : 0);
    }
    if (kind == "conv_block") return LayerSpec::conv_block(num(1), num(2));
    if (kind == "identity_block") return LayerSpec::identity_block(num(1), num(2));
    if (kind == "pool") {
      if (tok.size() < 3) throw ValueError("layer '" + value + "': expected 'pool max|avg N'");
      PoolKind pk;
      if (tok[1] == "max") pk = PoolKind::kMax;
      else if (tok[1] == "avg") pk = PoolKind::kAvg;
      else throw ValueError("layer '" + value + "': unknown pool kind");
      return LayerSpec::pooling(pk, num(2));
    }
    throw ValueError("unknown layer kind '" + kind + "'");
  }
};

}  // namespace morpheus
