// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The MorpheusNet Authors

#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <filesystem>
#include <numbers>

#include "morpheus/data/edf.hpp"
#include "morpheus/data/epochs.hpp"
#include "morpheus/data/preprocess.hpp"
#include "morpheus/data/synth.hpp"

using namespace morpheus;

namespace {

Bytes bytes_of(std::string_view s) { return Bytes(s.begin(), s.end()); }

EdfFile small_edf(std::size_t records) {
  EdfFile f;
  auto& h = f.header;
  h.patient = "X F 01-JAN-1970 subject";
  h.recording = "Startdate 01-JAN-1970 test";
  h.record_duration_s = 30;
  h.num_records = records;
  EdfSignalHeader eeg;
  eeg.label = "EEG Fpz-Cz";
  eeg.transducer = "Ag-AgCl electrodes";
  eeg.physical_dim = "uV";
  eeg.physical_min = -200;
  eeg.physical_max = 200;
  eeg.digital_min = -2048;
  eeg.digital_max = 2047;
  eeg.prefilter = "HP:0.5Hz";
  eeg.samples_per_record = 3000;
  EdfSignalHeader marker = eeg;
  marker.label = "Marker";
  marker.physical_min = 0;
  marker.physical_max = 1;
  marker.digital_min = 0;
  marker.digital_max = 1;
  marker.samples_per_record = 3;
  h.signals = {eeg, marker};
  h.header_bytes = 256 * 3;
  f.digital.resize(2);
  Rng rng(5);
  for (std::size_t i = 0; i < 3000 * records; ++i)
    f.digital[0].push_back(static_cast<std::int16_t>(-2048 + static_cast<int>(rng.index(4096))));
  for (std::size_t i = 0; i < 3 * records; ++i) f.digital[1].push_back(static_cast<std::int16_t>(i % 2));
  return f;
}

double correlation(std::span<const double> a, std::span<const double> b) {
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= static_cast<double>(a.size());
  mb /= static_cast<double>(b.size());
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

// Power between lo and hi Hz by direct DFT.
double band_power(std::span<const float> x, double fs, double lo, double hi) {
  const std::size_t n = x.size();
  double total = 0;
  for (std::size_t k = 1; k < n / 2; ++k) {
    const double f = static_cast<double>(k) * fs / static_cast<double>(n);
    if (f < lo || f > hi) continue;
    std::complex<double> acc = 0;
    for (std::size_t i = 0; i < n; ++i)
      acc += static_cast<double>(x[i]) *
             std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(k * i) / static_cast<double>(n));
    total += std::norm(acc);
  }
  return total;
}

}  // namespace

// --- EDF ------------------------------------------------------------------

TEST(Edf, PhysicalMappingOfDigitalZero) {
  EdfSignalHeader s;
  s.physical_min = -200;
  s.physical_max = 200;
  s.digital_min = -2048;
  s.digital_max = 2047;
  const double expected = (0.0 - -2048.0) * 400.0 / 4095.0 - 200.0;
  EXPECT_DOUBLE_EQ(s.to_physical(0), expected);
  EXPECT_NEAR(s.to_physical(0), 0.0488, 1e-4);
  EXPECT_EQ(s.to_physical(-2048), -200.0);
  EXPECT_EQ(s.to_physical(2047), 200.0);
}

TEST(Edf, RoundTripIsExact) {
  const auto f = small_edf(2);
  const auto bytes = write_edf(f);
  EXPECT_EQ(bytes.size(), 768u + 2 * 2 * 3003);
  const auto back = parse_edf(bytes);
  EXPECT_EQ(back.header, f.header);
  EXPECT_EQ(back.digital, f.digital);
  EXPECT_EQ(write_edf(back), bytes);
}

TEST(Edf, ZeroRecordFileRoundTrips) {
  const auto f = small_edf(0);
  const auto back = parse_edf(write_edf(f));
  EXPECT_EQ(back, f);
  EXPECT_TRUE(back.digital[0].empty());
}

TEST(Edf, ChannelSelectionAndRate) {
  const auto f = parse_edf(write_edf(small_edf(1)));
  const auto rec = edf_recording(f, "EEG Fpz-Cz", "s1");
  EXPECT_EQ(rec.sample_rate_hz, 100.0);
  EXPECT_EQ(rec.samples.size(), 3000u);
  EXPECT_THROW(edf_recording(f, "EEG Pz-Oz", "s1"), ValueError);
}

TEST(Edf, TruncationReportsOffset) {
  auto bytes = write_edf(small_edf(1));
  bytes.pop_back();
  try {
    parse_edf(bytes);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.offset(), bytes.size());
  }
  EXPECT_THROW(parse_edf(std::span(bytes).first(100)), ParseError);
  EXPECT_THROW(parse_edf(std::span(bytes).first(300)), ParseError);
}

TEST(Edf, HeaderBytesMismatch) {
  auto bytes = write_edf(small_edf(1));
  const std::string bad = "512     ";
  std::copy(bad.begin(), bad.end(), bytes.begin() + 184);
  try {
    parse_edf(bytes);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.offset(), 184u);
  }
}

TEST(Edf, EqualDigitalRangeRejected) {
  auto bytes = write_edf(small_edf(1));
  // digital_max of signal 0 sits after all digital_min fields.
  const std::size_t dmax0 = 256 + 2 * (16 + 80 + 8 + 8 + 8 + 8);
  const std::string same = "-2048   ";
  std::copy(same.begin(), same.end(), bytes.begin() + static_cast<std::ptrdiff_t>(dmax0));
  EXPECT_THROW(parse_edf(bytes), ParseError);
}

TEST(Edf, WriteRejectsInvalidHeader) {
  auto f = small_edf(1);
  f.header.signals[0].physical_max = f.header.signals[0].physical_min;
  EXPECT_THROW(write_edf(f), ValueError);
  f = small_edf(1);
  f.header.header_bytes = 256;
  EXPECT_THROW(write_edf(f), ValueError);
  f = small_edf(1);
  f.digital[0].pop_back();
  EXPECT_THROW(write_edf(f), ShapeError);
}

TEST(Edf, FuzzedBytesFailCleanly) {
  const auto good = write_edf(small_edf(1));
  Rng rng(11);
  for (int i = 0; i < 500; ++i) {
    auto b = good;
    const std::size_t flips = 1 + rng.index(8);
    for (std::size_t k = 0; k < flips; ++k) b[rng.index(768)] = static_cast<std::uint8_t>(rng.index(256));
    if (rng.bernoulli(0.3)) b.resize(rng.index(b.size()));
    try {
      parse_edf(b);
    } catch (const ParseError&) {
    }
  }
}

// --- TAL ------------------------------------------------------------------

TEST(Tal, OnsetDurationLabel) {
  const auto a = parse_tal(bytes_of(std::string_view("+30\x15" "60\x14Sleep stage W\x14\x00", 22)));
  ASSERT_EQ(a.size(), 1u);
  EXPECT_EQ(a[0].onset_s, 30.0);
  ASSERT_TRUE(a[0].duration_s.has_value());
  EXPECT_EQ(*a[0].duration_s, 60.0);
  EXPECT_EQ(a[0].label, "Sleep stage W");
}

TEST(Tal, TimekeepingListHasNoAnnotations) {
  EXPECT_TRUE(parse_tal(bytes_of(std::string_view("+0\x14\x14\x00", 5))).empty());
}

TEST(Tal, MissingSignIsError) {
  EXPECT_THROW(parse_tal(bytes_of(std::string_view("30\x14label\x14\x00", 11))), ParseError);
}

TEST(Tal, UnterminatedIsError) {
  EXPECT_THROW(parse_tal(bytes_of("+30\x14label\x14")), ParseError);
  EXPECT_THROW(parse_tal(bytes_of("+30\x14label")), ParseError);
  EXPECT_THROW(parse_tal(bytes_of("+30")), ParseError);
}

TEST(Tal, MultipleLabelsAndPadding) {
  const std::string s("+1.5\x14" "a\x14" "b\x14\x00-2\x14" "c\x14\x00\x00\x00", 19);
  const auto a = parse_tal(bytes_of(s));
  ASSERT_EQ(a.size(), 3u);
  EXPECT_EQ(a[0].label, "a");
  EXPECT_EQ(a[1].label, "b");
  EXPECT_EQ(a[1].onset_s, 1.5);
  EXPECT_FALSE(a[0].duration_s.has_value());
  EXPECT_EQ(a[2].onset_s, -2.0);
}

TEST(Tal, WriteParseRoundTrip) {
  const std::vector<Annotation> ann = {{0, 30.0, "Sleep stage W"}, {30, 90.0, "Sleep stage 2"}, {120, {}, "Lights on"}};
  EXPECT_EQ(parse_tal(write_tal(ann)), ann);
}

TEST(Tal, NeverReadsPastTerminator) {
  // Garbage after a complete list must not be consumed as part of it.
  const std::string s("+0\x14" "a\x14\x00", 6);
  auto b = bytes_of(s);
  const auto clean = parse_tal(b);
  b.push_back('x');
  EXPECT_THROW(parse_tal(b), ParseError);
  EXPECT_EQ(parse_tal(std::span(b).first(6)), clean);
}

TEST(Tal, AnnotationsFromEdfSignal) {
  const std::vector<Annotation> ann = {{0, 60.0, "Sleep stage W"}, {60, 30.0, "Sleep stage 4"}};
  auto tal = write_tal(ann);
  tal.resize(64, 0);
  EdfFile f;
  f.header.num_records = 1;
  f.header.record_duration_s = 90;
  EdfSignalHeader s;
  s.label = std::string(kEdfAnnotationLabel);
  s.samples_per_record = 32;
  f.header.signals = {s};
  f.header.header_bytes = 512;
  f.digital.resize(1);
  for (std::size_t i = 0; i < 32; ++i)
    f.digital[0].push_back(static_cast<std::int16_t>(static_cast<std::uint16_t>(tal[2 * i] | (tal[2 * i + 1] << 8))));
  const auto parsed = parse_edf(write_edf(f));
  EXPECT_EQ(edf_annotations(parsed), ann);
  const auto hyp = hypnogram_from_annotations(ann, 90);
  EXPECT_EQ(hyp.stages, (std::vector<int>{0, 0, 3}));
}

// --- stage mapping and hypnograms ------------------------------------------

TEST(StageMap, RkLabels) {
  EXPECT_EQ(*map_stage("Sleep stage W").stage, Stage::kW);
  EXPECT_EQ(*map_stage("Sleep stage 1").stage, Stage::kN1);
  EXPECT_EQ(*map_stage("Sleep stage 2").stage, Stage::kN2);
  EXPECT_EQ(*map_stage("Sleep stage 3").stage, Stage::kN3);
  EXPECT_EQ(*map_stage("Sleep stage 4").stage, Stage::kN3);
  EXPECT_EQ(*map_stage("Sleep stage R").stage, Stage::kREM);
  EXPECT_FALSE(map_stage("Sleep stage ?").accepted());
  EXPECT_FALSE(map_stage("Movement time").accepted());
}

TEST(StageMap, UnknownLabelEchoed) {
  const auto m = map_stage("Lights off");
  EXPECT_FALSE(m.accepted());
  EXPECT_NE(m.rejection.find("Lights off"), std::string::npos);
}

TEST(StageMap, IdempotentOnAasmLabels) {
  for (int s = 0; s < 5; ++s) {
    const auto m = map_stage(stage_name(s));
    ASSERT_TRUE(m.accepted()) << stage_name(s);
    EXPECT_EQ(static_cast<int>(*m.stage), s);
  }
}

TEST(Hypnogram, UncoveredAndExcludedEpochsRejected) {
  const std::vector<Annotation> ann = {{0, 30.0, "Sleep stage W"}, {60, 30.0, "Movement time"}, {90, 60.0, "Sleep stage R"}};
  const auto h = hypnogram_from_annotations(ann, 180);
  EXPECT_EQ(h.stages, (std::vector<int>{0, kRejectedStage, kRejectedStage, 4, 4, kRejectedStage}));
}

// --- resampling ------------------------------------------------------------

TEST(Resample, LengthArithmetic) {
  const std::vector<double> x(6000, 1.0);
  EXPECT_EQ(resample(x, 200, 100).size(), 3000u);
  EXPECT_EQ(resample(std::vector<double>(1001, 0.0), 250, 100).size(), 400u);
}

TEST(Resample, SameRateIsBitwiseCopy) {
  Rng rng(1);
  std::vector<double> x(500);
  for (auto& v : x) v = rng.normal();
  EXPECT_EQ(resample(x, 100, 100), x);
}

TEST(Resample, SineMatchesAnalyticSamples) {
  std::vector<double> x(2500);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::sin(2 * std::numbers::pi * 5.0 * static_cast<double>(i) / 250.0);
  const auto y = resample(x, 250, 100);
  ASSERT_EQ(y.size(), 1000u);
  std::vector<double> ref(y.size());
  for (std::size_t i = 0; i < ref.size(); ++i) ref[i] = std::sin(2 * std::numbers::pi * 5.0 * static_cast<double>(i) / 100.0);
  const std::size_t edge = 50;
  const auto c = correlation(std::span(y).subspan(edge, y.size() - 2 * edge),
                             std::span<const double>(ref).subspan(edge, ref.size() - 2 * edge));
  EXPECT_GT(c, 0.99);
}

TEST(Resample, RemovesContentAboveTargetNyquist) {
  std::vector<double> x(4000);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::sin(2 * std::numbers::pi * 80.0 * static_cast<double>(i) / 200.0);
  const auto y = resample(x, 200, 100);
  double energy = 0;
  for (std::size_t i = 100; i < y.size() - 100; ++i) energy += y[i] * y[i];
  EXPECT_LT(energy / static_cast<double>(y.size() - 200), 1e-3);
}

TEST(Resample, RejectsBadRates) {
  const std::vector<double> x(10, 0.0);
  EXPECT_THROW(resample(x, 0, 100), ValueError);
  EXPECT_THROW(resample(x, 100, -1), ValueError);
  EXPECT_THROW(resample(x, 0.5, 100), ValueError);
}

// --- preprocessing ---------------------------------------------------------

namespace {

Recording flat_recording(std::size_t epochs) {
  Recording r;
  r.subject = "s";
  r.samples.resize(epochs * kEpochSamples);
  Rng rng(3);
  for (auto& v : r.samples) v = rng.normal();
  return r;
}

}  // namespace

TEST(Preprocess, LeadingWakeTrimmedToSixtyEpochs) {
  // 8 h: 2 h wake, 5 h N2, 1 h wake.
  Hypnogram h;
  h.stages.assign(240, 0);
  h.stages.insert(h.stages.end(), 600, 2);
  h.stages.insert(h.stages.end(), 120, 0);
  const auto out = preprocess(flat_recording(960), h, Trim::kPm30);
  ASSERT_EQ(out.size(), 60u + 600u + 60u);
  for (std::size_t i = 0; i < 60; ++i) EXPECT_EQ(out.stages[i], 0);
  EXPECT_EQ(out.stages[60], 2);
  EXPECT_EQ(out.stages.back(), 0);
}

TEST(Preprocess, NoTrimDropsOnlyRejected) {
  Hypnogram h;
  h.stages = {0, 1, kRejectedStage, 2, 3, 4};
  const auto out = preprocess(flat_recording(6), h, Trim::kNone);
  EXPECT_EQ(out.size(), 5u);
  EXPECT_EQ(out.samples.size(), 5 * kEpochSamples);
  EXPECT_EQ(out.stages, (std::vector<int>{0, 1, 2, 3, 4}));
}

TEST(Preprocess, AllWakeKeptUnmodified) {
  Hypnogram h;
  h.stages.assign(200, 0);
  EXPECT_EQ(preprocess(flat_recording(200), h, Trim::kPm30).size(), 200u);
}

TEST(Preprocess, RobustScaledEpochsAligned) {
  auto rec = flat_recording(4);
  for (auto& v : rec.samples) v = v * 50 + 7;
  Hypnogram h;
  h.stages = {0, 1, 2, 3};
  const auto out = preprocess(rec, h, Trim::kNone);
  std::vector<double> all(out.samples.begin(), out.samples.end());
  EXPECT_NEAR(quantile(all, 0.5), 0.0, 1e-5);
  EXPECT_NEAR(quantile(all, 0.75) - quantile(all, 0.25), 1.0, 1e-5);
  // The output is one affine map of the input, epoch by epoch in order.
  const double a = (out.samples[1] - out.samples[0]) / (rec.samples[1] - rec.samples[0]);
  const double b = out.samples[0] - a * rec.samples[0];
  for (const std::size_t i : {3000u, 6001u, 11999u}) EXPECT_NEAR(out.samples[i], a * rec.samples[i] + b, 1e-4);
}

TEST(Preprocess, LengthMismatchBeyondOneEpoch) {
  Hypnogram h;
  h.stages.assign(10, 0);
  EXPECT_NO_THROW(preprocess(flat_recording(9), h, Trim::kNone));
  EXPECT_THROW(preprocess(flat_recording(8), h, Trim::kNone), ValueError);
}

TEST(Preprocess, RequiresHundredHertz) {
  auto rec = flat_recording(2);
  rec.sample_rate_hz = 200;
  Hypnogram h;
  h.stages = {0, 0};
  EXPECT_THROW(preprocess(rec, h, Trim::kNone), ValueError);
}

// --- splits ----------------------------------------------------------------

namespace {
std::vector<std::string> subjects(std::size_t n) {
  std::vector<std::string> s;
  for (std::size_t i = 0; i < n; ++i) s.push_back("s" + std::to_string(i));
  return s;
}
}  // namespace

TEST(KFold, LeaveOneOutWhenKEqualsSubjects) {
  for (std::size_t n : {20u, 25u}) {
    const auto plan = kfold_split(subjects(n), n, 4);
    for (std::size_t f = 0; f < n; ++f) EXPECT_EQ(plan.fold(f).size(), 1u);
  }
}

TEST(KFold, FoldSizesDifferByAtMostOne) {
  for (std::size_t n = 3; n < 30; ++n)
    for (std::size_t k = 1; k <= n; k += 2) {
      const auto plan = kfold_split(subjects(n), k, n * 31 + k);
      EXPECT_EQ(plan.fold_of.size(), n);
      std::size_t lo = n, hi = 0;
      for (std::size_t f = 0; f < k; ++f) {
        lo = std::min(lo, plan.fold(f).size());
        hi = std::max(hi, plan.fold(f).size());
      }
      EXPECT_LE(hi - lo, 1u);
    }
}

TEST(KFold, SeedDeterminesAssignment) {
  EXPECT_EQ(kfold_split(subjects(10), 5, 1).fold_of, kfold_split(subjects(10), 5, 1).fold_of);
  EXPECT_NE(kfold_split(subjects(10), 5, 1).fold_of, kfold_split(subjects(10), 5, 2).fold_of);
}

TEST(KFold, Errors) {
  EXPECT_THROW(kfold_split(subjects(3), 4, 1), ValueError);
  EXPECT_THROW(kfold_split({"a", "a"}, 2, 1), ValueError);
}

TEST(KFold, TsvRoundTrip) {
  const auto plan = kfold_split(subjects(7), 3, 9);
  const auto back = split_from_tsv(split_to_tsv(plan));
  EXPECT_EQ(back.fold_of, plan.fold_of);
  EXPECT_EQ(back.k, 3u);
}

// --- EPO1 and datasets -------------------------------------------------------

TEST(Epochs, RoundTrip) {
  const auto recs = synth_dataset(1, 3, 2);
  const auto bytes = write_epochs(recs[0]);
  EXPECT_EQ(bytes.size(), 8u + 3 * (1 + 4 * kEpochSamples));
  const auto back = read_epochs(bytes, recs[0].subject);
  EXPECT_EQ(back.samples, recs[0].samples);
  EXPECT_EQ(back.stages, recs[0].stages);
}

TEST(Epochs, CorruptContainersRejected) {
  auto bytes = write_epochs(synth_dataset(1, 2, 2)[0]);
  auto truncated = bytes;
  truncated.pop_back();
  EXPECT_THROW(read_epochs(truncated), ParseError);
  auto bad_stage = bytes;
  bad_stage[8] = 9;
  EXPECT_THROW(read_epochs(bad_stage), ParseError);
  bytes[0] = 'X';
  EXPECT_THROW(read_epochs(bytes), ParseError);
}

TEST(Epochs, DatasetDirectoryRoundTrip) {
  Dataset ds;
  ds.recordings = synth_dataset(4, 2, 8);
  std::vector<std::string> names;
  for (const auto& r : ds.recordings) names.push_back(r.subject);
  ds.split = kfold_split(names, 2, 1);
  const auto dir = std::filesystem::temp_directory_path() / "morpheus_test_dataset";
  std::filesystem::remove_all(dir);
  save_dataset(ds, dir);
  const auto back = load_dataset(dir);
  ASSERT_EQ(back.recordings.size(), 4u);
  EXPECT_EQ(back.recordings[2].subject, "subject_03");
  EXPECT_EQ(back.recordings[2].samples, ds.recordings[2].samples);
  EXPECT_EQ(back.split.fold_of, ds.split.fold_of);
  EXPECT_EQ(total_epochs(back.select({0})) + total_epochs(back.select_except({0})), 8u);
  std::filesystem::remove_all(dir);
}

// --- synthetic data ---------------------------------------------------------

TEST(Synth, SameSeedSameData) {
  const auto a = synth_dataset(2, 5, 42);
  const auto b = synth_dataset(2, 5, 42);
  EXPECT_EQ(a[1].samples, b[1].samples);
  EXPECT_EQ(a[1].stages, b[1].stages);
  EXPECT_NE(a[1].samples, synth_dataset(2, 5, 43)[1].samples);
}

TEST(Synth, CountsAndNames) {
  const auto d = synth_dataset(10, 20, 1);
  ASSERT_EQ(d.size(), 10u);
  EXPECT_EQ(d[0].subject, "subject_01");
  EXPECT_EQ(d[9].subject, "subject_10");
  EXPECT_EQ(total_epochs(d), 200u);
}

TEST(Synth, TransitionMatrixRowsAreStochastic) {
  const auto p = synth_transition_matrix(0.85);
  for (const auto& row : p) {
    double s = 0;
    for (const double v : row) s += v;
    EXPECT_NEAR(s, 1.0, 1e-12);
  }
  EXPECT_EQ(p[2][2], 0.85);
}

TEST(Synth, StageFrequenciesFollowStationaryDistribution) {
  const auto p = synth_transition_matrix(0.85);
  // Stationary distribution by power iteration.
  std::array<double, kNumStages> pi{};
  pi.fill(1.0 / kNumStages);
  for (int it = 0; it < 5000; ++it) {
    std::array<double, kNumStages> next{};
    for (std::size_t i = 0; i < kNumStages; ++i)
      for (std::size_t j = 0; j < kNumStages; ++j) next[j] += pi[i] * p[i][j];
    pi = next;
  }
  SynthOptions opt;
  opt.epoch_len = 300;
  const auto d = synth_dataset(4, 6000, 17, opt);
  std::array<double, kNumStages> count{};
  for (const auto& r : d)
    for (const int s : r.stages) count[static_cast<std::size_t>(s)] += 1;
  for (std::size_t s = 0; s < kNumStages; ++s) EXPECT_NEAR(count[s] / 24000.0, pi[s], 0.03) << stage_name(static_cast<int>(s));
}

TEST(Synth, SlowWaveBandPowerHighestInN3) {
  const auto d = synth_dataset(2, 120, 23);
  std::array<double, kNumStages> power{}, n{};
  for (const auto& r : d)
    for (std::size_t e = 0; e < r.size(); ++e) {
      const auto s = static_cast<std::size_t>(r.stages[e]);
      power[s] += band_power(r.epoch(e), 100.0, 0.5, 2.0);
      n[s] += 1;
    }
  ASSERT_GT(n[3], 0);
  const double n3 = power[3] / n[3];
  for (std::size_t s = 0; s < kNumStages; ++s)
    if (s != 3 && n[s] > 0) EXPECT_GT(n3, power[s] / n[s]) << stage_name(static_cast<int>(s));
}
