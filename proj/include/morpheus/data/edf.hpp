// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The MorpheusNet Authors

#pragma once

#include <charconv>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "morpheus/core/errors.hpp"
#include "morpheus/data/preprocess.hpp"
#include "morpheus/util/binary.hpp"
#include "morpheus/util/kv.hpp"

namespace morpheus {

struct EdfSignalHeader {
  std::string label;
  std::string transducer;
  std::string physical_dim;
  double physical_min = -1;
  double physical_max = 1;
  std::int64_t digital_min = -32768;
  std::int64_t digital_max = 32767;
  std::string prefilter;
  std::size_t samples_per_record = 0;
  std::string reserved;

  bool operator==(const EdfSignalHeader&) const = default;

  double to_physical(std::int64_t digital) const {
    if (digital == digital_min) return physical_min;
    if (digital == digital_max) return physical_max;
    return static_cast<double>(digital - digital_min) * (physical_max - physical_min) /
               static_cast<double>(digital_max - digital_min) +
           physical_min;
  }
};

struct EdfHeader {
  std::string version = "0";
  std::string patient;
  std::string recording;
  std::string start_date = "01.01.85";
  std::string start_time = "00.00.00";
  std::size_t header_bytes = 256;
  std::string reserved;
  std::size_t num_records = 0;
  double record_duration_s = 1;
  std::vector<EdfSignalHeader> signals;

  bool operator==(const EdfHeader&) const = default;
};

inline constexpr std::string_view kEdfAnnotationLabel = "EDF Annotations";

/// Parsed file: header plus raw digital samples, one series per signal with
/// all data records concatenated.
struct EdfFile {
  EdfHeader header;
  std::vector<std::vector<std::int16_t>> digital;

  bool operator==(const EdfFile&) const = default;

  std::size_t find_signal(std::string_view label) const {
    for (std::size_t i = 0; i < header.signals.size(); ++i)
      if (header.signals[i].label == label) return i;
    std::string known;
    for (const auto& s : header.signals) known += (known.empty() ? "" : ", ") + s.label;
    throw ValueError("no signal labelled '" + std::string(label) + "' (have: " + known + ")");
  }

  std::vector<double> physical(std::size_t signal) const {
    const auto& h = header.signals.at(signal);
    std::vector<double> out;
    out.reserve(digital[signal].size());
    for (const auto d : digital[signal]) out.push_back(h.to_physical(d));
    return out;
  }

  double sample_rate(std::size_t signal) const {
    return static_cast<double>(header.signals.at(signal).samples_per_record) / header.record_duration_s;
  }

  /// Samples of one record of one signal as little-endian bytes (the TAL
  /// payload for annotation signals).
  Bytes record_bytes(std::size_t signal, std::size_t record) const {
    const std::size_t n = header.signals.at(signal).samples_per_record;
    Bytes out;
    out.reserve(2 * n);
    for (std::size_t i = 0; i < n; ++i) {
      const auto v = static_cast<std::uint16_t>(digital[signal][record * n + i]);
      out.push_back(static_cast<std::uint8_t>(v & 0xFF));
      out.push_back(static_cast<std::uint8_t>(v >> 8));
    }
    return out;
  }
};

namespace detail {

inline std::string rtrim_field(std::string_view f) {
  std::size_t end = f.size();
  while (end > 0 && (f[end - 1] == ' ' || f[end - 1] == '\0')) --end;
  return std::string(f.substr(0, end));
}

class EdfFieldReader {
 public:
  explicit EdfFieldReader(std::span<const std::uint8_t> b) : bytes_(b) {}

  std::string text(std::size_t width, const char* what) {
    if (pos_ + width > bytes_.size()) throw ParseError(std::string("truncated header reading ") + what, pos_);
    std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), width);
    for (const char c : s)
      if (static_cast<unsigned char>(c) < 0x20 || static_cast<unsigned char>(c) > 0x7E)
        throw ParseError(std::string("non-ASCII byte in ") + what, pos_);
    pos_ += width;
    return rtrim_field(s);
  }

  double real(std::size_t width, const char* what) {
    const auto off = pos_;
    std::string s = trim(text(width, what));
    if (!s.empty() && s[0] == '+') s.erase(0, 1);
    double v = 0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc() || p != s.data() + s.size() || !std::isfinite(v))
      throw ParseError(std::string("invalid number in ") + what + ": '" + s + "'", off);
    return v;
  }

  std::int64_t integer(std::size_t width, const char* what) {
    const auto off = pos_;
    std::string s = trim(text(width, what));
    if (!s.empty() && s[0] == '+') s.erase(0, 1);
    std::int64_t v = 0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc() || p != s.data() + s.size())
      throw ParseError(std::string("invalid integer in ") + what + ": '" + s + "'", off);
    return v;
  }

  std::size_t pos() const { return pos_; }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

inline void put_field(ByteWriter& w, std::string_view s, std::size_t width, const char* what) {
  if (s.size() > width)
    throw ValueError(std::string("EDF field ") + what + " '" + std::string(s) + "' exceeds " + std::to_string(width) +
                     " characters");
  for (const char c : s)
    if (static_cast<unsigned char>(c) < 0x20 || static_cast<unsigned char>(c) > 0x7E)
      throw ValueError(std::string("EDF field ") + what + " must be printable ASCII");
  std::string padded(s);
  padded.resize(width, ' ');
  w.put_text(padded);
}

}  // namespace detail

inline void validate_edf_header(const EdfHeader& h) {
  if (h.header_bytes != 256 * (1 + h.signals.size()))
    throw ValueError("header_bytes " + std::to_string(h.header_bytes) + " != 256 * (1 + " +
                     std::to_string(h.signals.size()) + ")");
  if (!(h.record_duration_s >= 0)) throw ValueError("record duration must be non-negative");
  for (const auto& s : h.signals) {
    if (s.digital_min >= s.digital_max) throw ValueError("signal '" + s.label + "': digital_min must be < digital_max");
    if (s.digital_min < -32768 || s.digital_max > 32767)
      throw ValueError("signal '" + s.label + "': digital range exceeds 16 bits");
    if (s.physical_min == s.physical_max) throw ValueError("signal '" + s.label + "': physical_min == physical_max");
  }
}

inline EdfFile parse_edf(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 256) throw ParseError("truncated file: EDF header needs 256 bytes", bytes.size());
  detail::EdfFieldReader r(bytes);
  EdfFile f;
  auto& h = f.header;
  h.version = r.text(8, "version");
  h.patient = r.text(80, "patient");
  h.recording = r.text(80, "recording");
  h.start_date = r.text(8, "start date");
  h.start_time = r.text(8, "start time");
  const auto hb_off = r.pos();
  const auto header_bytes = r.integer(8, "header bytes");
  h.reserved = r.text(44, "reserved");
  const auto nrec_off = r.pos();
  const auto num_records = r.integer(8, "record count");
  h.record_duration_s = r.real(8, "record duration");
  const auto ns_off = r.pos();
  const auto num_signals = r.integer(4, "signal count");
  if (num_records < 0) throw ParseError("record count must be non-negative", nrec_off);
  if (num_signals < 0) throw ParseError("signal count must be non-negative", ns_off);
  if (h.record_duration_s < 0) throw ParseError("record duration must be non-negative", ns_off - 8);
  const auto ns = static_cast<std::size_t>(num_signals);
  if (header_bytes != static_cast<std::int64_t>(256 * (1 + ns)))
    throw ParseError("header_bytes " + std::to_string(header_bytes) + " does not match " + std::to_string(ns) +
                         " signals",
                     hb_off);
  if (bytes.size() < 256 * (1 + ns)) throw ParseError("truncated file inside signal headers", bytes.size());
  h.header_bytes = 256 * (1 + ns);
  h.num_records = static_cast<std::size_t>(num_records);
  h.signals.resize(ns);
  // Signal headers are stored field-major: all labels, then all transducers...
  for (auto& s : h.signals) s.label = r.text(16, "label");
  for (auto& s : h.signals) s.transducer = r.text(80, "transducer");
  for (auto& s : h.signals) s.physical_dim = r.text(8, "physical dimension");
  std::vector<std::size_t> pmin_off(ns), dmin_off(ns), spr_off(ns);
  for (std::size_t i = 0; i < ns; ++i) {
    pmin_off[i] = r.pos();
    h.signals[i].physical_min = r.real(8, "physical minimum");
  }
  for (auto& s : h.signals) s.physical_max = r.real(8, "physical maximum");
  for (std::size_t i = 0; i < ns; ++i) {
    dmin_off[i] = r.pos();
    h.signals[i].digital_min = r.integer(8, "digital minimum");
  }
  for (auto& s : h.signals) s.digital_max = r.integer(8, "digital maximum");
  for (auto& s : h.signals) s.prefilter = r.text(80, "prefilter");
  for (std::size_t i = 0; i < ns; ++i) {
    spr_off[i] = r.pos();
    const auto spr = r.integer(8, "samples per record");
    if (spr < 0) throw ParseError("samples per record must be non-negative", spr_off[i]);
    h.signals[i].samples_per_record = static_cast<std::size_t>(spr);
  }
  for (auto& s : h.signals) s.reserved = r.text(32, "signal reserved");
  for (std::size_t i = 0; i < ns; ++i) {
    const auto& s = h.signals[i];
    if (s.digital_min >= s.digital_max)
      throw ParseError("signal '" + s.label + "': digital_min must be below digital_max", dmin_off[i]);
    if (s.physical_min == s.physical_max)
      throw ParseError("signal '" + s.label + "': physical_min equals physical_max", pmin_off[i]);
  }

  std::uint64_t record_samples = 0;
  for (const auto& s : h.signals) record_samples += s.samples_per_record;
  const std::uint64_t data_bytes = bytes.size() - h.header_bytes;
  const std::uint64_t need = 2 * record_samples * h.num_records;
  if (record_samples > 0 && h.num_records > data_bytes / (2 * record_samples))
    throw ParseError("truncated file: " + std::to_string(h.num_records) + " records need " + std::to_string(need) +
                         " data bytes, have " + std::to_string(data_bytes),
                     bytes.size());
  if (data_bytes != need)
    throw ParseError("file has " + std::to_string(data_bytes - need) + " trailing bytes after the last record",
                     h.header_bytes + need);

  f.digital.resize(ns);
  for (std::size_t i = 0; i < ns; ++i) f.digital[i].reserve(h.signals[i].samples_per_record * h.num_records);
  std::size_t pos = h.header_bytes;
  for (std::size_t rec = 0; rec < h.num_records; ++rec) {
    for (std::size_t i = 0; i < ns; ++i) {
      for (std::size_t k = 0; k < h.signals[i].samples_per_record; ++k, pos += 2) {
        const auto v = static_cast<std::uint16_t>(bytes[pos] | (bytes[pos + 1] << 8));
        f.digital[i].push_back(static_cast<std::int16_t>(v));
      }
    }
  }
  return f;
}

inline Bytes write_edf(const EdfFile& f) {
  const auto& h = f.header;
  validate_edf_header(h);
  if (f.digital.size() != h.signals.size()) throw ShapeError("write_edf: one sample series per signal required");
  for (std::size_t i = 0; i < h.signals.size(); ++i) {
    if (f.digital[i].size() != h.signals[i].samples_per_record * h.num_records)
      throw ShapeError("write_edf: signal '" + h.signals[i].label + "' has " + std::to_string(f.digital[i].size()) +
                       " samples, header implies " +
                       std::to_string(h.signals[i].samples_per_record * h.num_records));
  }
  using detail::put_field;
  auto num = [](double v) { return format_number(v); };
  ByteWriter w;
  put_field(w, h.version, 8, "version");
  put_field(w, h.patient, 80, "patient");
  put_field(w, h.recording, 80, "recording");
  put_field(w, h.start_date, 8, "start date");
  put_field(w, h.start_time, 8, "start time");
  put_field(w, std::to_string(h.header_bytes), 8, "header bytes");
  put_field(w, h.reserved, 44, "reserved");
  put_field(w, std::to_string(h.num_records), 8, "record count");
  put_field(w, num(h.record_duration_s), 8, "record duration");
  put_field(w, std::to_string(h.signals.size()), 4, "signal count");
  for (const auto& s : h.signals) put_field(w, s.label, 16, "label");
  for (const auto& s : h.signals) put_field(w, s.transducer, 80, "transducer");
  for (const auto& s : h.signals) put_field(w, s.physical_dim, 8, "physical dimension");
  for (const auto& s : h.signals) put_field(w, num(s.physical_min), 8, "physical minimum");
  for (const auto& s : h.signals) put_field(w, num(s.physical_max), 8, "physical maximum");
  for (const auto& s : h.signals) put_field(w, std::to_string(s.digital_min), 8, "digital minimum");
  for (const auto& s : h.signals) put_field(w, std::to_string(s.digital_max), 8, "digital maximum");
  for (const auto& s : h.signals) put_field(w, s.prefilter, 80, "prefilter");
  for (const auto& s : h.signals) put_field(w, std::to_string(s.samples_per_record), 8, "samples per record");
  for (const auto& s : h.signals) put_field(w, s.reserved, 32, "signal reserved");
  for (std::size_t rec = 0; rec < h.num_records; ++rec)
    for (std::size_t i = 0; i < h.signals.size(); ++i) {
      const std::size_t n = h.signals[i].samples_per_record;
      for (std::size_t k = 0; k < n; ++k) w.put<std::int16_t>(f.digital[i][rec * n + k]);
    }
  return w.take();
}

// ---------------------------------------------------------------------------
// EDF+ time-stamped annotation lists

namespace detail {

inline double tal_number(std::string_view s, bool signed_required, std::size_t offset, const char* what) {
  std::string_view body = s;
  if (signed_required) {
    if (s.empty() || (s[0] != '+' && s[0] != '-'))
      throw ParseError(std::string(what) + " must start with '+' or '-'", offset);
    body = s.substr(1);
  }
  if (body.empty()) throw ParseError(std::string("empty ") + what, offset);
  for (const char c : body)
    if (!((c >= '0' && c <= '9') || c == '.')) throw ParseError(std::string("invalid character in ") + what, offset);
  double v = 0;
  const auto [p, ec] = std::from_chars(body.data(), body.data() + body.size(), v);
  if (ec != std::errc() || p != body.data() + body.size()) throw ParseError(std::string("invalid ") + what, offset);
  return signed_required && s[0] == '-' ? -v : v;
}

}  // namespace detail

/// Annotations from one TAL byte stream. Zero bytes between lists are padding.
inline std::vector<Annotation> parse_tal(std::span<const std::uint8_t> bytes) {
  constexpr std::uint8_t kDur = 0x15, kSep = 0x14, kEnd = 0x00;
  std::vector<Annotation> out;
  std::size_t p = 0;
  const std::size_t n = bytes.size();
  auto scan_to = [&](std::size_t from, auto stop) {
    std::size_t q = from;
    while (q < n && !stop(bytes[q])) ++q;
    return q;
  };
  auto view = [&](std::size_t a, std::size_t b) {
    return std::string_view(reinterpret_cast<const char*>(bytes.data() + a), b - a);
  };
  while (p < n) {
    if (bytes[p] == kEnd) {
      ++p;
      continue;
    }
    const std::size_t start = p;
    std::size_t q = scan_to(p, [](std::uint8_t c) { return c == kDur || c == kSep || c == kEnd; });
    if (q >= n || bytes[q] == kEnd) throw ParseError("unterminated annotation timestamp", q);
    const double onset = detail::tal_number(view(p, q), true, start, "onset");
    std::optional<double> duration;
    if (bytes[q] == kDur) {
      const std::size_t d0 = q + 1;
      q = scan_to(d0, [](std::uint8_t c) { return c == kDur || c == kSep || c == kEnd; });
      if (q >= n || bytes[q] != kSep) throw ParseError("unterminated annotation duration", q);
      duration = detail::tal_number(view(d0, q), false, d0, "duration");
    }
    p = q + 1;  // past the 0x14 ending the timestamp
    for (;;) {
      if (p >= n) throw ParseError("unterminated annotation list", p);
      if (bytes[p] == kEnd) {
        ++p;
        break;
      }
      const std::size_t l0 = p;
      q = scan_to(l0, [](std::uint8_t c) { return c == kSep || c == kEnd; });
      if (q >= n || bytes[q] != kSep) throw ParseError("unterminated annotation label", q);
      if (q > l0) out.push_back({onset, duration, std::string(view(l0, q))});
      p = q + 1;
    }
  }
  return out;
}

/// Serializes annotations one list each, for hypnogram round trips.
inline Bytes write_tal(std::span<const Annotation> annotations) {
  Bytes out;
  auto put = [&](std::string_view s) { out.insert(out.end(), s.begin(), s.end()); };
  for (const auto& a : annotations) {
    if (a.label.find_first_of(std::string_view("\x14\x15\0", 3)) != std::string::npos)
      throw ValueError("annotation label contains a delimiter byte");
    put(a.onset_s < 0 ? "-" : "+");
    put(format_number(std::abs(a.onset_s)));
    if (a.duration_s) {
      if (*a.duration_s < 0) throw ValueError("annotation duration must be non-negative");
      out.push_back(0x15);
      put(format_number(*a.duration_s));
    }
    out.push_back(0x14);
    put(a.label);
    out.push_back(0x14);
    out.push_back(0x00);
  }
  return out;
}

/// Every annotation in every "EDF Annotations" signal of the file.
inline std::vector<Annotation> edf_annotations(const EdfFile& f) {
  std::vector<Annotation> out;
  for (std::size_t i = 0; i < f.header.signals.size(); ++i) {
    if (f.header.signals[i].label != kEdfAnnotationLabel) continue;
    for (std::size_t r = 0; r < f.header.num_records; ++r) {
      const auto b = f.record_bytes(i, r);
      auto a = parse_tal(b);
      out.insert(out.end(), a.begin(), a.end());
    }
  }
  return out;
}

/// One channel of a parsed file in physical units.
inline Recording edf_recording(const EdfFile& f, std::string_view channel, std::string subject) {
  const auto i = f.find_signal(channel);
  if (!(f.header.record_duration_s > 0)) throw ValueError("record duration must be positive for signal data");
  Recording rec;
  rec.subject = std::move(subject);
  rec.label = std::string(channel);
  rec.sample_rate_hz = f.sample_rate(i);
  rec.samples = f.physical(i);
  return rec;
}

}  // namespace morpheus
