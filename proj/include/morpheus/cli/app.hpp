// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The MorpheusNet Authors
//
// Pipeline commands behind the `morpheus` executable. Exit codes: 0 success,
// 2 usage or input errors, 3 numerical failures (including a blown latency
// budget in `bench`).

#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <istream>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "morpheus/cli/manifest.hpp"
#include "morpheus/data/synth.hpp"
#include "morpheus/model/checkpoint.hpp"
#include "morpheus/model/eval.hpp"
#include "morpheus/model/train.hpp"
#include "morpheus/nas/search.hpp"
#include "morpheus/quant/quantize.hpp"
#include "morpheus/runtime/profile.hpp"

namespace morpheus::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 2;
inline constexpr int kExitNumeric = 3;

inline constexpr double kLatencyBudgetMs = 50.0;

/// Fold roles shared by every command: fold 0 is held out for testing,
/// fold 1 selects checkpoints, the rest train.
struct FoldRoles {
  std::size_t test = 0;
  std::size_t val = 1;

  std::vector<EpochRecording> train_set(const Dataset& ds) const {
    check(ds);
    return ds.select_except({test, val});
  }
  std::vector<EpochRecording> val_set(const Dataset& ds) const {
    check(ds);
    return ds.select({val});
  }
  std::vector<EpochRecording> test_set(const Dataset& ds) const {
    check(ds);
    return ds.select({test});
  }
  static void check(const Dataset& ds) {
    if (ds.split.k < 3) throw ValueError("split plan needs at least 3 folds (test, validation, training)");
  }
};

inline nlohmann::ordered_json report_json(const EvalReport& r) {
  nlohmann::ordered_json j;
  j["accuracy"] = r.accuracy;
  j["mf1"] = r.mf1;
  j["sensitivity"] = r.sensitivity;
  j["specificity"] = r.specificity;
  j["confusion"] = r.confusion;
  return j;
}

/// Stage predictions for one recording, from whichever model a file holds.
using RecordingPredictor = std::function<std::vector<int>(const EpochRecording&)>;

struct LoadedModel {
  std::string kind;  // "flat", "quantized" or "float"
  std::size_t input_len = 0;
  RecordingPredictor predict;
};

inline Tensor<float> recording_tensor(const EpochRecording& rec) {
  const auto refs = all_epochs(std::span(&rec, 1));
  return gather_epochs(std::span(&rec, 1), refs);
}

inline bool is_flat_model(std::span<const std::uint8_t> bytes) {
  return bytes.size() >= 4 && std::equal(bytes.begin(), bytes.begin() + 4, runtime::kFlatMagic);
}

inline LoadedModel load_any_model(const std::string& path) {
  const auto bytes = read_file(path);
  LoadedModel out;
  if (is_flat_model(bytes)) {
    auto engine = std::make_shared<runtime::StreamEngine>(runtime::StreamEngine::from_bytes(bytes));
    out.kind = "flat";
    out.input_len = engine->engine().input_len();
    out.predict = [engine](const EpochRecording& rec) {
      std::vector<int> stages;
      for (const auto& p : runtime::infer_full(*engine, recording_tensor(rec))) stages.push_back(p.stage);
      return stages;
    };
    return out;
  }
  auto ck = load_checkpoint(bytes);
  out.input_len = ck.model.config.input_len;
  if (ck.meta.has("quant.input")) {
    auto q = std::make_shared<QuantizedModel>(quantized_from_checkpoint(ck));
    out.kind = "quantized";
    out.predict = [q](const EpochRecording& rec) { return full_predict(q->model, std::span(&rec, 1), &q->sim); };
  } else {
    auto m = std::make_shared<MorpheusModel<float>>(std::move(ck.model));
    out.kind = "float";
    out.predict = [m](const EpochRecording& rec) { return full_predict(*m, std::span(&rec, 1)); };
  }
  return out;
}

struct FoldEvaluation {
  std::vector<EvalReport> folds;
  EvalReport aggregate;
};

inline FoldEvaluation evaluate_folds(const LoadedModel& model, const Dataset& ds, std::size_t k) {
  if (ds.split.k != k)
    throw ValueError("fold plan mismatch: data is split into " + std::to_string(ds.split.k) + " folds, --folds " +
                     std::to_string(k));
  for (const auto& r : ds.recordings)
    if (r.epoch_len != model.input_len)
      throw ShapeError("model expects " + std::to_string(model.input_len) + "-sample epochs, " + r.subject + " has " +
                       std::to_string(r.epoch_len));
  FoldEvaluation ev;
  std::vector<int> all_pred, all_labels;
  for (std::size_t f = 0; f < k; ++f) {
    std::vector<int> pred, labels;
    for (const auto& rec : ds.select({f})) {
      const auto p = model.predict(rec);
      pred.insert(pred.end(), p.begin(), p.end());
      labels.insert(labels.end(), rec.stages.begin(), rec.stages.end());
    }
    ev.folds.push_back(evaluate_metrics(pred, labels));
    all_pred.insert(all_pred.end(), pred.begin(), pred.end());
    all_labels.insert(all_labels.end(), labels.begin(), labels.end());
  }
  ev.aggregate = evaluate_metrics(all_pred, all_labels);
  return ev;
}

inline std::string metrics_row(const std::string& label, std::size_t epochs, double acc, double mf1, double sens,
                               double spec, bool signed_values = false) {
  char buf[160];
  const char* f = signed_values ? "%-10s %8s %+9.4f %+9.4f %+12.4f %+12.4f\n" : "%-10s %8s %9.4f %9.4f %12.4f %12.4f\n";
  std::snprintf(buf, sizeof buf, f, label.c_str(), epochs ? std::to_string(epochs).c_str() : "", acc, mf1, sens, spec);
  return buf;
}

inline std::string metrics_row(const std::string& label, const EvalReport& r) {
  return metrics_row(label, r.total, r.accuracy, r.mf1, r.sensitivity, r.specificity);
}

inline std::string metrics_header() {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-10s %8s %9s %9s %12s %12s\n", "fold", "epochs", "accuracy", "mf1",
                "sensitivity", "specificity");
  return buf;
}

/// Training hyperparameters from an optional key = value file.
inline TrainConfig train_config_from(const KeyValues& kv, std::uint64_t seed) {
  static const std::set<std::string, std::less<>> known = {"cnn_lr", "cnn_batch", "cnn_epochs",
                                                           "seq_lr", "seq_batch", "seq_epochs"};
  for (const auto& [k, v] : kv.entries())
    if (!known.count(k)) throw ValueError("train config: unknown key '" + k + "'");
  TrainConfig tc;
  tc.seed = seed;
  tc.cnn.lr = kv.number_or("cnn_lr", tc.cnn.lr);
  tc.cnn.batch = kv.number_or("cnn_batch", tc.cnn.batch);
  tc.cnn.epochs = kv.number_or("cnn_epochs", tc.cnn.epochs);
  tc.seq.lr = kv.number_or("seq_lr", tc.seq.lr);
  tc.seq.batch = kv.number_or("seq_batch", tc.seq.batch);
  tc.seq.epochs = kv.number_or("seq_epochs", tc.seq.epochs);
  return tc;
}

inline QatConfig qat_config_from(const KeyValues& kv, std::uint64_t seed) {
  static const std::set<std::string, std::less<>> known = {"qat_lr", "qat_batch", "qat_epochs",
                                                           "seq_lr", "seq_batch", "seq_epochs"};
  for (const auto& [k, v] : kv.entries())
    if (!known.count(k)) throw ValueError("quantize config: unknown key '" + k + "'");
  QatConfig qc;
  qc.seed = seed;
  qc.cnn.lr = kv.number_or("qat_lr", qc.cnn.lr);
  qc.cnn.batch = kv.number_or("qat_batch", qc.cnn.batch);
  qc.cnn.epochs = kv.number_or("qat_epochs", qc.cnn.epochs);
  qc.seq.lr = kv.number_or("seq_lr", qc.seq.lr);
  qc.seq.batch = kv.number_or("seq_batch", qc.seq.batch);
  qc.seq.epochs = kv.number_or("seq_epochs", qc.seq.epochs);
  return qc;
}

inline QuantizationPlan load_plan(const std::string& plan, const MorpheusConfig& cfg) {
  if (plan == "all") return QuantizationPlan::all(cfg);
  if (plan == "start_identity_excluded") return QuantizationPlan::start_identity_excluded(cfg);
  return QuantizationPlan::from_text(read_text_file(plan), cfg);
}

inline EpochLogger phase_logger(std::ostream& err, std::size_t total) {
  return [&err, total](const EpochStat& s) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "[%s] epoch %zu/%zu  loss %.4f  val_accuracy %.4f\n", s.phase.c_str(), s.epoch,
                  total, s.train_loss, s.val_accuracy);
    err << buf << std::flush;
  };
}

// ---------------------------------------------------------------------------
// Commands

struct SynthArgs {
  std::size_t subjects = 0, epochs = 0, folds = 5;
  std::uint64_t seed = 1;
  std::string out;
};

inline int cmd_synth(const SynthArgs& a, std::ostream& out) {
  RunManifest man{"synth", {}, a.seed, {}, {a.out}};
  Dataset ds;
  ds.recordings = synth_dataset(a.subjects, a.epochs, a.seed);
  std::vector<std::string> names;
  for (const auto& r : ds.recordings) names.push_back(r.subject);
  ds.split = kfold_split(names, a.folds, a.seed);
  save_dataset(ds, a.out);
  man.details["subjects"] = a.subjects;
  man.details["epochs_per_subject"] = a.epochs;
  man.details["folds"] = a.folds;
  man.write();
  out << "wrote " << a.subjects << " recordings, " << total_epochs(ds.recordings) << " epochs, " << a.folds
      << " folds to " << a.out << "\n";
  return kExitOk;
}

struct SearchArgs {
  std::string data, config, out;
  std::optional<std::uint64_t> seed;
};

inline int cmd_search(const SearchArgs& a, std::ostream& out, std::ostream& err) {
  auto cfg = nas::SearchConfig::from_kv(KeyValues::load(a.config));
  if (a.seed) cfg.seed = *a.seed;
  const auto ds = load_dataset(a.data);
  const auto train = FoldRoles{}.train_set(ds);
  const std::string log_path = a.out + ".search.csv";
  std::string log = "step,loss,cell,alpha\n";
  const std::size_t every = std::max<std::size_t>(cfg.steps / 10, 1);
  const auto net = nas::run_search(cfg, train, [&](std::size_t step, double loss, const nas::SearchNetwork<float>& n) {
    for (std::size_t c = 0; c < n.cells.size(); ++c) {
      log += std::to_string(step) + "," + format_number(loss) + "," + std::to_string(c) + ",";
      for (std::size_t j = 0; j < n.cells[c].alpha.size(); ++j)
        log += (j ? " " : "") + format_number(static_cast<double>(n.cells[c].alpha[j]));
      log += "\n";
    }
    if (step % every == 0 || step == cfg.steps) err << "[search] step " << step << "/" << cfg.steps << "  loss " << loss << "\n" << std::flush;
  });
  const auto choices = nas::finalize_architecture(net);
  const auto model_cfg = nas::export_config(choices, train.front().epoch_len);
  std::string text = "# searched architecture\n";
  for (const auto& c : choices) {
    std::string alphas;
    for (const double v : c.alpha) alphas += (alphas.empty() ? "" : " ") + format_number(v);
    const std::string line = "cell " + std::to_string(c.cell) + " " +
                             (c.kind == nas::CellKind::kConv ? "conv" : "reduction") + ": " + c.op.to_string() +
                             "  alpha [" + alphas + "]";
    text += "# " + line + "\n";
    out << line << "\n";
  }
  text += model_cfg.to_text();
  write_text_file(a.out, text);
  write_text_file(log_path, log);
  RunManifest man{"search", a.config, cfg.seed, {a.data, a.config}, {a.out, log_path}};
  man.details["cells"] = choices.size();
  man.details["steps"] = cfg.steps;
  man.details["parameters"] = param_count(build_morpheus<float>(model_cfg, 1));
  man.write();
  return kExitOk;
}

struct TrainArgs {
  std::string data, arch, out, config;
  std::uint64_t seed = 1;
};

inline int cmd_train(const TrainArgs& a, std::ostream& out, std::ostream& err) {
  const auto tc = train_config_from(a.config.empty() ? KeyValues{} : KeyValues::load(a.config), a.seed);
  const auto cfg = MorpheusConfig::from_text(read_text_file(a.arch));
  const auto ds = load_dataset(a.data);
  const FoldRoles roles;
  const auto train = roles.train_set(ds), val = roles.val_set(ds), test = roles.test_set(ds);
  if (train.front().epoch_len != cfg.input_len)
    throw ShapeError("architecture expects " + std::to_string(cfg.input_len) + "-sample epochs, data has " +
                     std::to_string(train.front().epoch_len));
  auto m = build_morpheus<float>(cfg, a.seed);
  err << "[train] " << param_count(m) << " parameters; " << total_epochs(train) << " training epochs\n";
  History hist;
  train_cnn(m, train, val, tc.cnn, tc, nullptr, &hist, phase_logger(err, tc.cnn.epochs), "cnn");
  const auto st = make_sequence_dataset(cnn_probability_tables(m, train), train, cfg.sequence_len);
  const auto sv = make_sequence_dataset(cnn_probability_tables(m, val), val, cfg.sequence_len);
  train_sequence_learner(m.seq, st, sv, tc.seq, tc, &hist, phase_logger(err, tc.seq.epochs), "sequence");
  const double cnn_acc = cnn_accuracy(m, test);
  const double full_acc = accuracy(full_predict(m, test), concat_labels(test));
  KeyValues meta;
  meta.set("train.data", a.data);
  meta.set("train.seed", std::to_string(a.seed));
  save_checkpoint_file(a.out, m, meta);
  const std::string hist_path = a.out + ".history.csv";
  write_text_file(hist_path, history_csv(hist));
  RunManifest man{"train", a.config, a.seed, {a.data, a.arch}, {a.out, hist_path}};
  if (!a.config.empty()) man.inputs.push_back(a.config);
  man.details["parameters"] = param_count(m);
  man.details["test_fold"] = roles.test;
  man.details["val_fold"] = roles.val;
  man.details["test_accuracy_cnn"] = cnn_acc;
  man.details["test_accuracy_full"] = full_acc;
  man.write();
  char buf[128];
  std::snprintf(buf, sizeof buf, "test accuracy: cnn %.4f, cnn + sequence %.4f\n", cnn_acc, full_acc);
  out << buf;
  return kExitOk;
}

struct QuantizeArgs {
  std::string model, plan, out, data, config;
  std::uint64_t seed = 1;
};

inline int cmd_quantize(const QuantizeArgs& a, std::ostream& out, std::ostream& err) {
  const auto qc = qat_config_from(a.config.empty() ? KeyValues{} : KeyValues::load(a.config), a.seed);
  auto ck = load_checkpoint_file(a.model);
  if (ck.model.folded) throw ValueError(a.model + " is already folded; quantize a trained float checkpoint");
  const std::string data = a.data.empty() ? ck.meta.get_or("train.data", "") : a.data;
  if (data.empty()) throw ValueError("no --data given and the checkpoint does not name its training data");
  const auto plan = load_plan(a.plan, ck.model.config);
  const auto ds = load_dataset(data);
  const FoldRoles roles;
  const auto train = roles.train_set(ds), val = roles.val_set(ds), test = roles.test_set(ds);
  History hist;
  auto res = qat_finetune_cnn(ck.model, plan, train, val, qc, &hist, phase_logger(err, qc.cnn.epochs));
  auto& q = res.quantized;
  finetune_sequence_on_quantized(q, train, val, qc, &hist, phase_logger(err, qc.seq.epochs));
  const double float_acc = accuracy(full_predict(ck.model, test), concat_labels(test));
  const double quant_acc = accuracy(full_predict(q.model, test, &q.sim), concat_labels(test));
  KeyValues extra;
  for (const auto& [k, v] : ck.meta.entries())
    if (k.rfind("quant.", 0) != 0) extra.set(k, v);
  write_file(a.out, save_quantized(q, extra));
  const std::string cal_path = a.out + ".calibration.csv", hist_path = a.out + ".history.csv";
  write_text_file(cal_path, calibration_csv(q.calibration));
  write_text_file(hist_path, history_csv(hist));
  RunManifest man{"quantize", a.config, a.seed, {a.model, data}, {a.out, cal_path, hist_path}};
  if (std::filesystem::is_regular_file(a.plan)) man.inputs.push_back(a.plan);
  if (!a.config.empty()) man.inputs.push_back(a.config);
  auto quantized = nlohmann::ordered_json::array(), excluded = nlohmann::ordered_json::array();
  for (const auto& [n, on] : plan.layers) (on ? quantized : excluded).push_back(n);
  man.details["plan"] = {{"source", a.plan}, {"quantized", quantized}, {"excluded", excluded}};
  man.details["test_accuracy_float"] = float_acc;
  man.details["test_accuracy_quantized"] = quant_acc;
  man.write();
  char buf[160];
  std::snprintf(buf, sizeof buf, "test accuracy: float %.4f, quantized %.4f (%+.2f points); %zu layer(s) kept float\n",
                float_acc, quant_acc, 100.0 * (quant_acc - float_acc), excluded.size());
  out << buf;
  return kExitOk;
}

struct CompileArgs {
  std::string model, out;
};

inline int cmd_compile(const CompileArgs& a, std::ostream& out) {
  const auto q = load_quantized(read_file(a.model));
  const auto bytes = runtime::compile_flat_model(q);
  write_file(a.out, bytes);
  const runtime::Engine engine(runtime::FlatModel::from_bytes(bytes));
  RunManifest man{"compile", {}, std::nullopt, {a.model}, {a.out}};
  man.details["model_bytes"] = bytes.size();
  man.details["budget_bytes"] = runtime::kFlatModelBudget;
  man.details["layers"] = engine.model().layers.size();
  man.details["arena_bytes"] = engine.plan().arena_bytes;
  man.write();
  out << "wrote " << a.out << ": " << bytes.size() << " bytes (budget " << runtime::kFlatModelBudget
      << "), arena " << engine.plan().arena_bytes << " bytes\n";
  return kExitOk;
}

struct EvaluateArgs {
  std::string model, data, baseline, json;
  std::size_t folds = 0;
};

inline int cmd_evaluate(const EvaluateArgs& a, std::ostream& out) {
  const auto ds = load_dataset(a.data);
  const auto model = load_any_model(a.model);
  const auto ev = evaluate_folds(model, ds, a.folds);
  nlohmann::ordered_json j;
  j["model"] = a.model;
  j["kind"] = model.kind;
  j["folds"] = nlohmann::ordered_json::array();
  out << metrics_header();
  for (std::size_t f = 0; f < ev.folds.size(); ++f) {
    out << metrics_row(std::to_string(f), ev.folds[f]);
    j["folds"].push_back(report_json(ev.folds[f]));
  }
  out << metrics_row("all", ev.aggregate);
  j["aggregate"] = report_json(ev.aggregate);
  if (!a.baseline.empty()) {
    const auto base = evaluate_folds(load_any_model(a.baseline), ds, a.folds);
    const auto& m = ev.aggregate;
    const auto& b = base.aggregate;
    out << metrics_row("baseline", b);
    out << metrics_row("delta", 0, m.accuracy - b.accuracy, m.mf1 - b.mf1, m.sensitivity - b.sensitivity,
                       m.specificity - b.specificity, true);
    j["baseline"] = report_json(b);
    j["delta"] = {{"accuracy", m.accuracy - b.accuracy},
                  {"mf1", m.mf1 - b.mf1},
                  {"sensitivity", m.sensitivity - b.sensitivity},
                  {"specificity", m.specificity - b.specificity}};
  }
  const std::string json_path = a.json.empty() ? a.model + ".eval.json" : a.json;
  write_text_file(json_path, j.dump(2) + "\n");
  return kExitOk;
}

struct InferArgs {
  std::string model, stream = "-";
};

/// Reads raw little-endian float32 chunks of one epoch each and prints one
/// line per epoch as soon as it is classified.
inline int cmd_infer(const InferArgs& a, std::istream& in, std::ostream& out, std::ostream& err) {
  auto s = runtime::StreamEngine::from_bytes(read_file(a.model));
  std::ifstream file;
  std::istream* src = &in;
  if (a.stream != "-") {
    file.open(a.stream, std::ios::binary);
    if (!file) throw IoError("cannot open " + a.stream);
    src = &file;
  }
  const std::size_t L = s.engine().input_len();
  std::vector<float> chunk(L);
  std::size_t index = 0;
  char buf[64];
  for (;;) {
    src->read(reinterpret_cast<char*>(chunk.data()), static_cast<std::streamsize>(L * sizeof(float)));
    const auto got = static_cast<std::size_t>(src->gcount());
    if (got == 0) break;
    if (got != L * sizeof(float)) {
      err << "epoch " << index << ": truncated chunk of " << got << " bytes, expected " << L * sizeof(float) << "\n";
      return kExitInput;
    }
    runtime::StreamStep step;
    try {
      step = s.push(chunk);
    } catch (const Error& e) {
      err << "epoch " << index << ": " << e.what() << "\n";
      return kExitInput;
    }
    out << index << '\t' << stage_name(step.stage) << '\t';
    for (std::size_t k = 0; k < step.probabilities.size(); ++k) {
      std::snprintf(buf, sizeof buf, "%s%.6f", k ? " " : "", static_cast<double>(step.probabilities[k]));
      out << buf;
    }
    out << '\n' << std::flush;
    ++index;
  }
  return kExitOk;
}

struct BenchArgs {
  std::string model;
  std::size_t runs = 100;
  std::uint64_t seed = 1;
  double max_median_ms = kLatencyBudgetMs;
};

inline int cmd_bench(const BenchArgs& a, std::ostream& out, std::ostream& err) {
  const auto bytes = read_file(a.model);
  auto s = runtime::StreamEngine::from_bytes(bytes);
  const std::size_t L = s.engine().input_len();
  SynthOptions opt;
  opt.epoch_len = L;
  const auto recs = synth_dataset(1, 16, a.seed, opt);
  const auto inputs = recording_tensor(recs.front());
  const std::size_t before = s.engine().buffer_acquisitions();
  const auto report = runtime::profile(s, inputs, a.runs, bytes.size());
  out << report.to_json().dump(2) << "\n";
  const std::size_t acquired = s.engine().buffer_acquisitions() - before;
  char buf[200];
  std::snprintf(buf, sizeof buf, "median %.3f ms, p95 %.3f ms over %zu runs; %zu buffer acquisitions during inference\n",
                report.latency_ms_median, report.latency_ms_p95, report.runs, acquired);
  err << buf;
  if (report.latency_ms_median >= a.max_median_ms) {
    err << "median latency exceeds the " << a.max_median_ms << " ms budget\n";
    return kExitNumeric;
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------

/// Parses `args` (without the program name) and runs one command.
inline int run_cli(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err) {
  CLI::App app{"MorpheusNet sleep staging pipeline", "morpheus"};
  app.require_subcommand(1, 1);

  SynthArgs synth;
  auto* c_synth = app.add_subcommand("synth", "Generate a seeded synthetic dataset with a fold plan");
  c_synth->add_option("--subjects", synth.subjects, "Number of recordings")->required();
  c_synth->add_option("--epochs", synth.epochs, "Epochs per recording")->required();
  c_synth->add_option("--seed", synth.seed, "Random seed");
  c_synth->add_option("--folds", synth.folds, "Subject-wise folds in the split plan");
  c_synth->add_option("--out", synth.out, "Output directory")->required();

  SearchArgs search;
  auto* c_search = app.add_subcommand("search", "Run the architecture search and write an architecture config");
  c_search->add_option("--data", search.data, "Data directory")->required();
  c_search->add_option("--config", search.config, "Search config (key = value)")->required();
  c_search->add_option("--out", search.out, "Architecture config to write")->required();
  c_search->add_option("--seed", search.seed, "Override the config seed");

  TrainArgs train;
  auto* c_train = app.add_subcommand("train", "Train the CNN, then the sequence learner");
  c_train->add_option("--data", train.data, "Data directory")->required();
  c_train->add_option("--arch", train.arch, "Architecture config")->required();
  c_train->add_option("--out", train.out, "Checkpoint to write")->required();
  c_train->add_option("--config", train.config, "Training hyperparameters (key = value)");
  c_train->add_option("--seed", train.seed, "Random seed");

  QuantizeArgs quant;
  auto* c_quant = app.add_subcommand("quantize", "Calibrate and fine-tune with fake quantization");
  c_quant->add_option("--model", quant.model, "Trained float checkpoint")->required();
  c_quant->add_option("--plan", quant.plan, "Plan file, or 'all' / 'start_identity_excluded'")->required();
  c_quant->add_option("--out", quant.out, "Quantized checkpoint to write")->required();
  c_quant->add_option("--data", quant.data, "Data directory (defaults to the one the model was trained on)");
  c_quant->add_option("--config", quant.config, "Fine-tuning hyperparameters (key = value)");
  c_quant->add_option("--seed", quant.seed, "Random seed");

  CompileArgs compile;
  auto* c_compile = app.add_subcommand("compile", "Lower a quantized checkpoint to a flat int8 model");
  c_compile->add_option("--model", compile.model, "Quantized checkpoint")->required();
  c_compile->add_option("--out", compile.out, "Flat model to write")->required();

  EvaluateArgs eval;
  auto* c_eval = app.add_subcommand("evaluate", "Per-fold and aggregate staging metrics");
  c_eval->add_option("--model", eval.model, "Checkpoint or flat model")->required();
  c_eval->add_option("--data", eval.data, "Data directory")->required();
  c_eval->add_option("--folds", eval.folds, "Expected number of folds")->required();
  c_eval->add_option("--baseline", eval.baseline, "Second model for a paired comparison");
  c_eval->add_option("--json", eval.json, "JSON report path (default <model>.eval.json)");

  InferArgs infer;
  auto* c_infer = app.add_subcommand("infer", "Stage a stream of raw float32 epochs");
  c_infer->add_option("--model", infer.model, "Flat model")->required();
  c_infer->add_option("--stream", infer.stream, "Input file, or - for stdin");

  BenchArgs bench;
  auto* c_bench = app.add_subcommand("bench", "Profile per-epoch latency, memory and MACs");
  c_bench->add_option("--model", bench.model, "Flat model")->required();
  c_bench->add_option("--runs", bench.runs, "Timed runs");
  c_bench->add_option("--seed", bench.seed, "Seed of the synthetic input epochs");
  c_bench->add_option("--max-median-ms", bench.max_median_ms, "Latency budget");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInput;
  }
  try {
    if (c_synth->parsed()) return cmd_synth(synth, out);
    if (c_search->parsed()) return cmd_search(search, out, err);
    if (c_train->parsed()) return cmd_train(train, out, err);
    if (c_quant->parsed()) return cmd_quantize(quant, out, err);
    if (c_compile->parsed()) return cmd_compile(compile, out);
    if (c_eval->parsed()) return cmd_evaluate(eval, out);
    if (c_infer->parsed()) return cmd_infer(infer, in, out, err);
    if (c_bench->parsed()) return cmd_bench(bench, out, err);
  } catch (const NumericError& e) {
    err << "error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  }
  return kExitInput;
}

}  // namespace morpheus::cli
