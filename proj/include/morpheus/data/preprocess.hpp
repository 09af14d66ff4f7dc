// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The MorpheusNet Authors

#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "morpheus/data/epochs.hpp"

namespace morpheus {

/// One channel in physical units.
struct Recording {
  std::string subject;
  std::string label;
  double sample_rate_hz = 100.0;
  std::vector<double> samples;

  double duration_s() const { return static_cast<double>(samples.size()) / sample_rate_hz; }
};

struct Annotation {
  double onset_s = 0;
  std::optional<double> duration_s;
  std::string label;

  bool operator==(const Annotation&) const = default;
};

inline constexpr int kRejectedStage = -1;

/// Per-30-s stage codes; kRejectedStage marks unscored or excluded epochs.
struct Hypnogram {
  std::vector<int> stages;
  double epoch_duration_s = 30.0;
};

struct StageMapping {
  std::optional<Stage> stage;
  std::string rejection;  // why the epoch is excluded when `stage` is empty

  bool accepted() const { return stage.has_value(); }
};

/// R&K and AASM labels onto the five classes; stage 4 merges into N3.
/// "Movement time" and "?" are rejected; unknown labels are rejected with the
/// label echoed.
inline StageMapping map_stage(std::string_view label) {
  std::string s = trim(label);
  const std::string prefix = "Sleep stage ";
  if (s.rfind(prefix, 0) == 0) s = s.substr(prefix.size());
  if (s == "W") return {Stage::kW, {}};
  if (s == "1" || s == "N1") return {Stage::kN1, {}};
  if (s == "2" || s == "N2") return {Stage::kN2, {}};
  if (s == "3" || s == "4" || s == "N3" || s == "N4") return {Stage::kN3, {}};
  if (s == "R" || s == "REM") return {Stage::kREM, {}};
  if (s == "Movement time" || s == "?" || s == "MT") return {std::nullopt, "excluded label '" + std::string(label) + "'"};
  return {std::nullopt, "unknown label '" + std::string(label) + "'"};
}

/// Epoch labels from stage annotations. Epochs no annotation covers stay
/// rejected; non-stage annotations are ignored.
inline Hypnogram hypnogram_from_annotations(std::span<const Annotation> annotations, double duration_s,
                                            double epoch_s = 30.0) {
  Hypnogram h;
  h.epoch_duration_s = epoch_s;
  h.stages.assign(static_cast<std::size_t>(std::floor(duration_s / epoch_s)), kRejectedStage);
  for (const auto& a : annotations) {
    const auto m = map_stage(a.label);
    const bool stage_like = m.accepted() || a.label.rfind("Sleep stage", 0) == 0 || a.label == "Movement time";
    if (!stage_like) continue;
    const double dur = a.duration_s.value_or(epoch_s);
    const auto first = static_cast<std::ptrdiff_t>(std::llround(a.onset_s / epoch_s));
    const auto count = static_cast<std::ptrdiff_t>(std::llround(dur / epoch_s));
    for (std::ptrdiff_t e = first; e < first + count; ++e) {
      if (e < 0 || e >= static_cast<std::ptrdiff_t>(h.stages.size())) continue;
      h.stages[static_cast<std::size_t>(e)] = m.accepted() ? static_cast<int>(*m.stage) : kRejectedStage;
    }
  }
  return h;
}

// ---------------------------------------------------------------------------
// Resampling

inline constexpr std::size_t kResampleHalfTaps = 32;  // per side, at the lower rate
inline constexpr double kKaiserBeta = 8.0;

/// Band-limited rational resampling: each output sample is a Kaiser-windowed
/// sinc interpolation of the input with cutoff at the lower Nyquist rate,
/// 2 x 32 taps wide at the lower rate, normalized to unit DC gain. Output
/// length is round(n * target / source); equal rates copy the input.
inline std::vector<double> resample(std::span<const double> x, double source_hz, double target_hz) {
  if (!(source_hz > 0) || !(target_hz > 0)) throw ValueError("resample: rates must be positive");
  if (source_hz < 1.0) throw ValueError("resample: source rate must be at least 1 Hz");
  if (source_hz == target_hz) return std::vector<double>(x.begin(), x.end());
  const auto n_out = static_cast<std::size_t>(std::llround(static_cast<double>(x.size()) * target_hz / source_hz));
  std::vector<double> y(n_out, 0.0);
  if (x.empty()) return y;
  const double ratio = std::min(1.0, target_hz / source_hz);  // cutoff relative to source Nyquist
  const double half_width = static_cast<double>(kResampleHalfTaps) / ratio;  // in source samples
  // Kaiser window sampled on |r| in [0, 1], linearly interpolated.
  constexpr std::size_t kTable = 4096;
  std::vector<double> kaiser(kTable + 2);
  const double i0_beta = std::cyl_bessel_i(0.0, kKaiserBeta);
  for (std::size_t i = 0; i <= kTable; ++i) {
    const double r = static_cast<double>(i) / kTable;
    kaiser[i] = std::cyl_bessel_i(0.0, kKaiserBeta * std::sqrt(std::max(0.0, 1.0 - r * r))) / i0_beta;
  }
  kaiser[kTable + 1] = 0.0;
  const auto n_in = static_cast<std::ptrdiff_t>(x.size());
  for (std::size_t n = 0; n < n_out; ++n) {
    const double u = static_cast<double>(n) * source_hz / target_hz;
    const auto lo = static_cast<std::ptrdiff_t>(std::ceil(u - half_width));
    const auto hi = static_cast<std::ptrdiff_t>(std::floor(u + half_width));
    double acc = 0, wsum = 0;
    for (std::ptrdiff_t k = lo; k <= hi; ++k) {
      const double d = u - static_cast<double>(k);
      const double pos = std::min(1.0, std::abs(d) / half_width) * kTable;
      const auto idx = static_cast<std::size_t>(pos);
      const double win = kaiser[idx] + (pos - static_cast<double>(idx)) * (kaiser[idx + 1] - kaiser[idx]);
      const double arg = std::numbers::pi * ratio * d;
      const double sinc = d == 0.0 ? 1.0 : std::sin(arg) / arg;
      const double h = win * sinc;
      wsum += h;
      // Edge samples outside the signal are taken as zero but still count
      // toward the normalization, so edges taper rather than blow up.
      if (k >= 0 && k < n_in) acc += h * x[static_cast<std::size_t>(k)];
    }
    y[n] = wsum != 0.0 ? acc / wsum : 0.0;
  }
  return y;
}

inline Recording resample(const Recording& rec, double target_hz) {
  Recording out = rec;
  out.samples = resample(rec.samples, rec.sample_rate_hz, target_hz);
  out.sample_rate_hz = target_hz;
  return out;
}

// ---------------------------------------------------------------------------
// Scaling and epoching

/// Linear-interpolated quantile of a copy of `v`.
inline double quantile(std::vector<double> v, double q) {
  if (v.empty()) throw ValueError("quantile of an empty series");
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(lo), v.end());
  const double a = v[lo];
  if (lo + 1 >= v.size()) return a;
  const double b = *std::min_element(v.begin() + static_cast<std::ptrdiff_t>(lo) + 1, v.end());
  return a + (pos - static_cast<double>(lo)) * (b - a);
}

/// (x - median) / IQR in place. A zero IQR leaves the scale at 1.
inline void robust_scale(std::span<double> x) {
  if (x.empty()) return;
  std::vector<double> copy(x.begin(), x.end());
  const double med = quantile(copy, 0.5);
  const double iqr = quantile(copy, 0.75) - quantile(std::move(copy), 0.25);
  const double scale = iqr > 1e-12 ? iqr : 1.0;
  for (auto& v : x) v = (v - med) / scale;
}

enum class Trim { kNone, kPm30 };

inline constexpr std::size_t kTrimWakeEpochs = 60;  // 30 minutes

/// Cuts a 100 Hz recording into 3000-sample epochs aligned with the
/// hypnogram, robust-scales it, optionally keeps at most 30 minutes of wake on
/// either side of the sleep period, and drops rejected epochs.
inline EpochRecording preprocess(const Recording& rec, const Hypnogram& hyp, Trim trim) {
  if (std::abs(rec.sample_rate_hz - 100.0) > 1e-9) {
    throw ValueError("preprocess: expected a 100 Hz recording, got " + std::to_string(rec.sample_rate_hz) + " Hz");
  }
  const std::size_t n_rec = rec.samples.size() / kEpochSamples;
  const std::size_t n_hyp = hyp.stages.size();
  if ((n_rec > n_hyp ? n_rec - n_hyp : n_hyp - n_rec) > 1) {
    throw ValueError("preprocess: hypnogram has " + std::to_string(n_hyp) + " epochs, recording has " +
                     std::to_string(n_rec));
  }
  const std::size_t n = std::min(n_rec, n_hyp);
  std::vector<double> scaled(rec.samples.begin(), rec.samples.begin() + static_cast<std::ptrdiff_t>(n * kEpochSamples));
  robust_scale(scaled);

  std::size_t first = 0, last = n;  // keep [first, last)
  if (trim == Trim::kPm30) {
    std::optional<std::size_t> lo, hi;
    for (std::size_t e = 0; e < n; ++e) {
      const int s = hyp.stages[e];
      if (s != kRejectedStage && s != static_cast<int>(Stage::kW)) {
        if (!lo) lo = e;
        hi = e;
      }
    }
    if (lo) {
      first = *lo > kTrimWakeEpochs ? *lo - kTrimWakeEpochs : 0;
      last = std::min(n, *hi + kTrimWakeEpochs + 1);
    }
  }
  EpochRecording out;
  out.subject = rec.subject;
  for (std::size_t e = first; e < last; ++e) {
    if (hyp.stages[e] == kRejectedStage) continue;
    out.stages.push_back(hyp.stages[e]);
    out.samples.insert(out.samples.end(), scaled.begin() + static_cast<std::ptrdiff_t>(e * kEpochSamples),
                       scaled.begin() + static_cast<std::ptrdiff_t>((e + 1) * kEpochSamples));
  }
  return out;
}

}  // namespace morpheus
