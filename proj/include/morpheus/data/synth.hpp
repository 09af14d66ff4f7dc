// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The MorpheusNet Authors

#pragma once

#include <array>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <string>
#include <vector>

#include "morpheus/core/random.hpp"
#include "morpheus/data/epochs.hpp"
#include "morpheus/data/preprocess.hpp"

namespace morpheus {

using TransitionMatrix = std::array<std::array<double, kNumStages>, kNumStages>;

struct SynthOptions {
  double self_transition = 0.85;
  double artifact_rate = 0.08;  // epochs whose stage signature is buried in noise
  double sample_rate = 100.0;
  std::size_t epoch_len = kEpochSamples;
};

/// Sticky chain with a night-like off-diagonal: W <-> N1 -> N2 <-> N3,
/// N2 <-> REM. Rows sum to 1.
inline TransitionMatrix synth_transition_matrix(double self = 0.85) {
  // Relative off-diagonal weights, row = from, column = to (W N1 N2 N3 REM).
  constexpr double rel[kNumStages][kNumStages] = {
      {0, 8, 1, 0, 1},
      {3, 0, 6, 0, 1},
      {1, 2, 0, 4, 3},
      {1, 0, 8, 0, 1},
      {2, 3, 5, 0, 0},
  };
  TransitionMatrix p{};
  for (std::size_t i = 0; i < kNumStages; ++i) {
    double total = 0;
    for (std::size_t j = 0; j < kNumStages; ++j) total += rel[i][j];
    for (std::size_t j = 0; j < kNumStages; ++j)
      p[i][j] = i == j ? self : (1.0 - self) * rel[i][j] / total;
  }
  return p;
}

namespace detail {

/// Pink (1/f) noise via a three-pole filter on white noise.
class PinkNoise {
 public:
  double next(Rng& rng) {
    const double white = rng.normal();
    b0_ = 0.99765 * b0_ + white * 0.0990460;
    b1_ = 0.96300 * b1_ + white * 0.2965164;
    b2_ = 0.57000 * b2_ + white * 1.0526913;
    return (b0_ + b1_ + b2_ + white * 0.1848) * 0.25;
  }

 private:
  double b0_ = 0, b1_ = 0, b2_ = 0;
};

struct SubjectTraits {
  double gain;     // overall amplitude
  double shift;    // frequency offset, Hz
  double noise;    // background level
};

inline void stage_signal(int stage, const SubjectTraits& s, Rng& rng, double fs,
                         std::span<double> out) {
  const double two_pi = 2.0 * std::numbers::pi;
  const double phase = rng.uniform(0.0, two_pi);
  const double jitter = rng.uniform(-0.3, 0.3);
  auto tone = [&](double hz, double amp) {
    for (std::size_t i = 0; i < out.size(); ++i)
      out[i] += amp * std::sin(two_pi * hz * static_cast<double>(i) / fs + phase);
  };
  switch (static_cast<Stage>(stage)) {
    case Stage::kW: tone(10.0 + s.shift + jitter, 1.0); break;
    case Stage::kN1: tone(7.0 + s.shift + jitter, 0.8); break;
    case Stage::kN2: {
      tone(3.0 + jitter, 0.3);
      const std::size_t bursts = 2 + rng.index(3);
      const double dur = static_cast<double>(out.size()) / fs;
      for (std::size_t b = 0; b < bursts; ++b) {
        const double center = rng.uniform(1.0, dur - 1.0);
        const double f = 13.0 + s.shift + rng.uniform(-0.5, 0.5);
        const double ph = rng.uniform(0.0, two_pi);
        for (std::size_t i = 0; i < out.size(); ++i) {
          const double t = static_cast<double>(i) / fs;
          const double env = std::exp(-0.5 * std::pow((t - center) / 0.35, 2));
          out[i] += 1.5 * env * std::sin(two_pi * f * t + ph);
        }
      }
      break;
    }
    case Stage::kN3: tone(1.5 + 0.2 * jitter, 2.5); break;
    case Stage::kREM: tone(5.0 + s.shift + jitter, 0.5); break;
  }
}

}  // namespace detail

/// Seeded stand-in for scored overnight recordings: stage sequences from a
/// sticky Markov chain, one spectral signature per stage over pink noise,
/// robust-scaled per recording. Subjects are named subject_01, subject_02, ...
inline std::vector<EpochRecording> synth_dataset(std::size_t n_subjects, std::size_t epochs_per_subject,
                                                 std::uint64_t seed, const SynthOptions& opt = {}) {
  if (n_subjects == 0) throw ValueError("synth: need at least one subject");
  if (epochs_per_subject == 0) throw ValueError("synth: need at least one epoch per subject");
  const auto trans = synth_transition_matrix(opt.self_transition);
  Rng rng(seed);
  std::vector<EpochRecording> out;
  const int width = n_subjects >= 100 ? 3 : 2;
  for (std::size_t s = 0; s < n_subjects; ++s) {
    char name[32];
    std::snprintf(name, sizeof name, "subject_%0*zu", width, s + 1);
    detail::SubjectTraits traits{rng.uniform(0.7, 1.3), rng.uniform(-0.4, 0.4), rng.uniform(0.8, 1.2)};
    EpochRecording rec;
    rec.subject = name;
    rec.epoch_len = opt.epoch_len;
    std::vector<double> raw(epochs_per_subject * opt.epoch_len, 0.0);
    detail::PinkNoise pink;
    int stage = static_cast<int>(Stage::kW);
    for (std::size_t e = 0; e < epochs_per_subject; ++e) {
      if (e > 0) {
        const double u = rng.uniform();
        double acc = 0;
        int next = static_cast<int>(kNumStages) - 1;
        for (std::size_t j = 0; j < kNumStages; ++j) {
          acc += trans[static_cast<std::size_t>(stage)][j];
          if (u < acc) {
            next = static_cast<int>(j);
            break;
          }
        }
        stage = next;
      }
      rec.stages.push_back(stage);
      std::span<double> ep(raw.data() + e * opt.epoch_len, opt.epoch_len);
      const bool artifact = rng.bernoulli(opt.artifact_rate);
      detail::stage_signal(stage, traits, rng, opt.sample_rate, ep);
      const double sig_gain = artifact ? 0.15 : 1.0;
      const double noise_gain = artifact ? 3.0 : 1.0;
      for (auto& v : ep) v = traits.gain * (sig_gain * v + noise_gain * traits.noise * pink.next(rng));
    }
    robust_scale(raw);
    rec.samples.assign(raw.begin(), raw.end());
    out.push_back(std::move(rec));
  }
  return out;
}

}  // namespace morpheus
