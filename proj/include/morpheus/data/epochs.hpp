// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The MorpheusNet Authors

#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "morpheus/core/random.hpp"
#include "morpheus/util/binary.hpp"
#include "morpheus/util/kv.hpp"

namespace morpheus {

enum class Stage : std::uint8_t { kW = 0, kN1 = 1, kN2 = 2, kN3 = 3, kREM = 4 };

inline constexpr std::size_t kNumStages = 5;
inline constexpr std::size_t kEpochSamples = 3000;  // 30 s at 100 Hz
inline constexpr std::array<const char*, kNumStages> kStageNames = {"W", "N1", "N2", "N3", "REM"};

inline const char* stage_name(int s) {
  if (s < 0 || s >= static_cast<int>(kNumStages)) throw ValueError("stage index out of range");
  return kStageNames[static_cast<std::size_t>(s)];
}

/// One subject's time-ordered epochs, `epoch_len` samples each.
struct EpochRecording {
  std::string subject;
  std::size_t epoch_len = kEpochSamples;
  std::vector<float> samples;
  std::vector<int> stages;

  std::size_t size() const noexcept { return stages.size(); }
  std::span<const float> epoch(std::size_t i) const {
    return std::span<const float>(samples).subspan(i * epoch_len, epoch_len);
  }
};

// EPO1: "EPO1", u32 count, then per epoch u8 stage + 3000 float32 samples.

inline Bytes write_epochs(const EpochRecording& rec) {
  if (rec.epoch_len != kEpochSamples) {
    throw ValueError("EPO1 stores " + std::to_string(kEpochSamples) + "-sample epochs, got " +
                     std::to_string(rec.epoch_len));
  }
  if (rec.samples.size() != rec.size() * rec.epoch_len) throw ShapeError("recording sample count mismatch");
  ByteWriter w;
  w.put_text("EPO1");
  w.put<std::uint32_t>(static_cast<std::uint32_t>(rec.size()));
  for (std::size_t i = 0; i < rec.size(); ++i) {
    if (rec.stages[i] < 0 || rec.stages[i] >= static_cast<int>(kNumStages)) {
      throw ValueError("epoch " + std::to_string(i) + " has an invalid stage");
    }
    w.put<std::uint8_t>(static_cast<std::uint8_t>(rec.stages[i]));
    w.put_array(rec.epoch(i));
  }
  return w.take();
}

inline EpochRecording read_epochs(std::span<const std::uint8_t> bytes, std::string subject = {}) {
  ByteReader r(bytes);
  if (r.get_text(4, "magic") != "EPO1") throw ParseError("bad magic, expected \"EPO1\"", 0);
  const auto count = r.get<std::uint32_t>("epoch count");
  if (static_cast<std::size_t>(count) * (1 + 4 * kEpochSamples) != r.remaining()) {
    throw ParseError("EPO1 payload size does not match " + std::to_string(count) + " epochs", r.pos());
  }
  EpochRecording rec;
  rec.subject = std::move(subject);
  rec.samples.reserve(count * kEpochSamples);
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto off = r.pos();
    const auto stage = r.get<std::uint8_t>("stage");
    if (stage >= kNumStages) throw ParseError("invalid stage code " + std::to_string(stage), off);
    rec.stages.push_back(stage);
    const auto s = r.get_array<float>(kEpochSamples, "samples");
    rec.samples.insert(rec.samples.end(), s.begin(), s.end());
  }
  return rec;
}

// ---------------------------------------------------------------------------
// Subject-wise folds

struct SplitPlan {
  std::size_t k = 0;
  std::uint64_t seed = 0;
  std::map<std::string, std::size_t> fold_of;

  std::vector<std::string> fold(std::size_t f) const {
    std::vector<std::string> out;
    for (const auto& [s, i] : fold_of)
      if (i == f) out.push_back(s);
    return out;
  }
};

/// Shuffles subjects with `seed` and deals them round-robin into k folds.
inline SplitPlan kfold_split(std::vector<std::string> subjects, std::size_t k, std::uint64_t seed) {
  if (k == 0) throw ValueError("kfold: k must be positive");
  if (k > subjects.size()) {
    throw ValueError("kfold: k = " + std::to_string(k) + " exceeds " + std::to_string(subjects.size()) +
                     " subjects");
  }
  std::sort(subjects.begin(), subjects.end());
  if (std::adjacent_find(subjects.begin(), subjects.end()) != subjects.end()) {
    throw ValueError("kfold: duplicate subject id");
  }
  Rng rng(seed);
  rng.shuffle(subjects.begin(), subjects.end());
  SplitPlan plan{k, seed, {}};
  for (std::size_t i = 0; i < subjects.size(); ++i) plan.fold_of[subjects[i]] = i % k;
  return plan;
}

inline std::string split_to_tsv(const SplitPlan& plan) {
  std::string out;
  for (const auto& [s, f] : plan.fold_of) out += s + "\t" + std::to_string(f) + "\n";
  return out;
}

inline SplitPlan split_from_tsv(std::string_view text) {
  SplitPlan plan;
  std::istringstream in{std::string(text)};
  std::size_t line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw ValueError("split line " + std::to_string(line_no) + ": expected subject<TAB>fold");
    const auto fold = KeyValues::to_number<std::size_t>(trim(line.substr(tab + 1)), "fold");
    plan.fold_of[line.substr(0, tab)] = fold;
    plan.k = std::max(plan.k, fold + 1);
  }
  return plan;
}

// ---------------------------------------------------------------------------
// Data directories: subject_XX.epo files plus split.tsv

struct Dataset {
  std::vector<EpochRecording> recordings;
  SplitPlan split;

  std::vector<EpochRecording> select(const std::vector<std::size_t>& folds) const {
    std::vector<EpochRecording> out;
    for (const auto& r : recordings) {
      const auto it = split.fold_of.find(r.subject);
      if (it == split.fold_of.end()) throw ValueError("subject " + r.subject + " missing from split plan");
      if (std::find(folds.begin(), folds.end(), it->second) != folds.end()) out.push_back(r);
    }
    return out;
  }

  /// Every fold except the listed ones.
  std::vector<EpochRecording> select_except(const std::vector<std::size_t>& folds) const {
    std::vector<std::size_t> keep;
    for (std::size_t f = 0; f < split.k; ++f)
      if (std::find(folds.begin(), folds.end(), f) == folds.end()) keep.push_back(f);
    return select(keep);
  }
};

inline void save_dataset(const Dataset& ds, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  for (const auto& r : ds.recordings) write_file((dir / (r.subject + ".epo")).string(), write_epochs(r));
  write_text_file((dir / "split.tsv").string(), split_to_tsv(ds.split));
}

inline Dataset load_dataset(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw IoError("data directory " + dir.string() + " not found");
  Dataset ds;
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(dir))
    if (e.path().extension() == ".epo") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  if (files.empty()) throw IoError("no .epo files in " + dir.string());
  for (const auto& f : files) {
    const auto bytes = read_file(f.string());
    ds.recordings.push_back(read_epochs(bytes, f.stem().string()));
  }
  const auto split_path = dir / "split.tsv";
  if (!std::filesystem::exists(split_path)) throw IoError("missing " + split_path.string());
  ds.split = split_from_tsv(read_text_file(split_path.string()));
  return ds;
}

inline std::size_t total_epochs(std::span<const EpochRecording> recs) {
  std::size_t n = 0;
  for (const auto& r : recs) n += r.size();
  return n;
}

}  // namespace morpheus
