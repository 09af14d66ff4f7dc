// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The MorpheusNet Authors

#pragma once

#include <cstdint>
#include <span>
#include <string>

#include "morpheus/model/morpheus.hpp"
#include "morpheus/util/binary.hpp"
#include "morpheus/util/kv.hpp"

namespace morpheus {

// MNF1 float checkpoint, little-endian:
//   "MNF1" | u32 version | u32 flags (bit 0: folded)
//   u32 len | config text (key = value)
//   u32 len | metadata text (key = value, free-form)
//   u32 tensor count | per tensor: u16 name len, name, u8 rank, u32 dims[rank], f32 data
//   u32 CRC-32 of everything before it

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  MorpheusModel<float> model;
  KeyValues meta;
};

inline Bytes save_checkpoint(const MorpheusModel<float>& model, const KeyValues& meta = {}) {
  auto& m = const_cast<MorpheusModel<float>&>(model);  // named_tensors only hands out pointers
  ByteWriter w;
  w.put_text("MNF1");
  w.put<std::uint32_t>(kCheckpointVersion);
  w.put<std::uint32_t>(model.folded ? 1u : 0u);
  for (const std::string text : {model.config.to_text(), meta.to_string()}) {
    w.put<std::uint32_t>(static_cast<std::uint32_t>(text.size()));
    w.put_text(text);
  }
  const auto tensors = m.named_tensors();
  w.put<std::uint32_t>(static_cast<std::uint32_t>(tensors.size()));
  for (const auto& [name, t] : tensors) {
    w.put<std::uint16_t>(static_cast<std::uint16_t>(name.size()));
    w.put_text(name);
    w.put<std::uint8_t>(static_cast<std::uint8_t>(t->rank()));
    for (const auto d : t->shape()) w.put<std::uint32_t>(static_cast<std::uint32_t>(d));
    w.put_array(std::span<const float>(t->data(), t->size()));
  }
  w.append_crc();
  return w.take();
}

inline Checkpoint load_checkpoint(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4 || std::string_view(reinterpret_cast<const char*>(bytes.data()), 4) != "MNF1")
    throw ParseError("not a float checkpoint (bad magic)", 0);
  ByteReader r(verify_crc(bytes));
  r.seek(4);
  const auto version = r.get<std::uint32_t>("version");
  if (version != kCheckpointVersion)
    throw ParseError("unsupported checkpoint version " + std::to_string(version), 4);
  const auto flags = r.get<std::uint32_t>("flags");
  auto text = [&](const char* what) {
    const auto n = r.get<std::uint32_t>(what);
    return r.get_text(n, what);
  };
  const auto cfg_off = r.pos();
  MorpheusConfig cfg;
  try {
    cfg = MorpheusConfig::from_text(text("config"));
  } catch (const ParseError&) {
    throw;
  } catch (const Error& e) {
    throw ParseError(std::string("invalid model config: ") + e.what(), cfg_off);
  }
  Checkpoint ck{build_morpheus<float>(cfg, 0), KeyValues::parse(text("metadata"))};
  if (flags & 1u) ck.model = fold_model(ck.model);
  auto expected = ck.model.named_tensors();
  const auto count = r.get<std::uint32_t>("tensor count");
  if (count != expected.size())
    throw ParseError("checkpoint holds " + std::to_string(count) + " tensors, model expects " +
                         std::to_string(expected.size()),
                     r.pos() - 4);
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto off = r.pos();
    const auto name = r.get_text(r.get<std::uint16_t>("name length"), "tensor name");
    if (name != expected[i].first)
      throw ParseError("tensor " + std::to_string(i) + " is '" + name + "', expected '" + expected[i].first + "'", off);
    Tensor<float>& t = *expected[i].second;
    const auto rank = r.get<std::uint8_t>("rank");
    Shape shape;
    for (std::uint8_t d = 0; d < rank; ++d) shape.push_back(r.get<std::uint32_t>("dim"));
    if (shape != t.shape())
      throw ParseError("tensor '" + name + "' has shape " + shape_to_string(shape) + ", expected " +
                           shape_to_string(t.shape()),
                       off);
    auto values = r.get_array<float>(t.size(), "tensor data");
    t = Tensor<float>(std::move(shape), std::move(values));
  }
  if (r.remaining() != 0) throw ParseError("trailing bytes after tensors", r.pos());
  return ck;
}

inline void save_checkpoint_file(const std::string& path, const MorpheusModel<float>& m, const KeyValues& meta = {}) {
  write_file(path, save_checkpoint(m, meta));
}

inline Checkpoint load_checkpoint_file(const std::string& path) { return load_checkpoint(read_file(path)); }

}  // namespace morpheus
