// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The MorpheusNet Authors

#pragma once

#include <zlib.h>

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "morpheus/core/errors.hpp"

namespace morpheus {

static_assert(std::endian::native == std::endian::little,
              "binary containers assume a little-endian host");

using Bytes = std::vector<std::uint8_t>;

inline std::uint32_t crc32_of(std::span<const std::uint8_t> bytes) {
  uLong crc = crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed large buffers in pieces.
  std::size_t pos = 0;
  while (pos < bytes.size()) {
    const auto n = static_cast<uInt>(std::min<std::size_t>(bytes.size() - pos, 1u << 30));
    crc = crc32(crc, bytes.data() + pos, n);
    pos += n;
  }
  return static_cast<std::uint32_t>(crc);
}

/// Append-only little-endian encoder.
class ByteWriter {
 public:
  template <typename V>
    requires std::is_arithmetic_v<V>
  void put(V v) {
    std::uint8_t raw[sizeof(V)];
    std::memcpy(raw, &v, sizeof(V));
    bytes_.insert(bytes_.end(), raw, raw + sizeof(V));
  }

  void put_bytes(std::span<const std::uint8_t> b) { bytes_.insert(bytes_.end(), b.begin(), b.end()); }
  void put_text(std::string_view s) {
    bytes_.insert(bytes_.end(), s.begin(), s.end());
  }

  template <typename V>
  void put_array(std::span<const V> values) {
    const auto* p = reinterpret_cast<const std::uint8_t*>(values.data());
    bytes_.insert(bytes_.end(), p, p + values.size_bytes());
  }

  template <typename V>
  void patch(std::size_t offset, V v) {
    std::memcpy(bytes_.data() + offset, &v, sizeof(V));
  }

  void append_crc() { put<std::uint32_t>(crc32_of(bytes_)); }

  std::size_t size() const noexcept { return bytes_.size(); }
  const Bytes& bytes() const noexcept { return bytes_; }
  Bytes take() { return std::move(bytes_); }

 private:
  Bytes bytes_;
};

/// Bounds-checked little-endian decoder; every failure is a ParseError with
/// the offending byte offset.
class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  template <typename V>
    requires std::is_arithmetic_v<V>
  V get(const char* what = "value") {
    need(sizeof(V), what);
    V v;
    std::memcpy(&v, bytes_.data() + pos_, sizeof(V));
    pos_ += sizeof(V);
    return v;
  }

  std::span<const std::uint8_t> get_bytes(std::size_t n, const char* what = "bytes") {
    need(n, what);
    auto s = bytes_.subspan(pos_, n);
    pos_ += n;
    return s;
  }

  std::string get_text(std::size_t n, const char* what = "text") {
    auto s = get_bytes(n, what);
    return std::string(s.begin(), s.end());
  }

  template <typename V>
  std::vector<V> get_array(std::size_t count, const char* what = "array") {
    if (count > bytes_.size()) throw ParseError(std::string(what) + " count too large", pos_);
    auto raw = get_bytes(count * sizeof(V), what);
    std::vector<V> out(count);
    std::memcpy(out.data(), raw.data(), raw.size());
    return out;
  }

  void need(std::size_t n, const char* what) const {
    if (n > bytes_.size() - pos_) {
      throw ParseError(std::string("truncated input reading ") + what, pos_);
    }
  }

  std::size_t pos() const noexcept { return pos_; }
  std::size_t remaining() const noexcept { return bytes_.size() - pos_; }
  void seek(std::size_t p) {
    if (p > bytes_.size()) throw ParseError("seek past end", p);
    pos_ = p;
  }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

/// Checks the trailing CRC-32 and returns the payload in front of it.
inline std::span<const std::uint8_t> verify_crc(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4) throw ParseError("input too short for checksum", bytes.size());
  const auto payload = bytes.first(bytes.size() - 4);
  std::uint32_t stored;
  std::memcpy(&stored, bytes.data() + payload.size(), 4);
  if (stored != crc32_of(payload)) throw ParseError("checksum mismatch", payload.size());
  return payload;
}

inline Bytes read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  return Bytes(std::istreambuf_iterator<char>(in), {});
}

inline void write_file(const std::string& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("short write to " + path);
}

inline void write_text_file(const std::string& path, std::string_view text) {
  write_file(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

inline std::string read_text_file(const std::string& path) {
  const auto b = read_file(path);
  return std::string(b.begin(), b.end());
}

}  // namespace morpheus
