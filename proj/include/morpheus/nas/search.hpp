// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The MorpheusNet Authors

#pragma once

#include <cmath>
#include <functional>
#include <set>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

#include "morpheus/core/random.hpp"
#include "morpheus/data/epochs.hpp"
#include "morpheus/model/config.hpp"
#include "morpheus/ops/activation.hpp"
#include "morpheus/ops/adam.hpp"
#include "morpheus/ops/conv.hpp"
#include "morpheus/ops/dense.hpp"
#include "morpheus/ops/loss.hpp"
#include "morpheus/ops/pool.hpp"

namespace morpheus::nas {

enum class OpKind { kNormalConv, kSeparableConv, kMaxPool, kAvgPool };

inline const char* to_string(OpKind k) {
  switch (k) {
    case OpKind::kNormalConv: return "normal";
    case OpKind::kSeparableConv: return "separable";
    case OpKind::kMaxPool: return "max_pool";
    case OpKind::kAvgPool: return "avg_pool";
  }
  return "?";
}

inline OpKind parse_op_kind(const std::string& s) {
  if (s == "normal") return OpKind::kNormalConv;
  if (s == "separable") return OpKind::kSeparableConv;
  if (s == "max_pool") return OpKind::kMaxPool;
  if (s == "avg_pool") return OpKind::kAvgPool;
  throw ValueError("unknown candidate kind '" + s + "'");
}

/// Candidate descriptor. For pools `kernel` is the window and `filters` is 0.
struct OpSpec {
  OpKind kind = OpKind::kNormalConv;
  std::size_t kernel = 1;
  std::size_t filters = 0;

  bool is_conv() const { return kind == OpKind::kNormalConv || kind == OpKind::kSeparableConv; }
  bool operator==(const OpSpec&) const = default;

  std::string to_string() const {
    std::string s = nas::to_string(kind);
    s += " " + std::to_string(kernel);
    if (is_conv()) s += " " + std::to_string(filters);
    return s;
  }

  /// Inverse of to_string(): "separable 8 32" or "max_pool 4".
  static OpSpec parse(std::string_view text) {
    const auto parts = split_ws(text);
    if (parts.empty()) throw ValueError("empty candidate descriptor");
    OpSpec op{parse_op_kind(parts[0]), 0, 0};
    if (parts.size() != (op.is_conv() ? 3u : 2u))
      throw ValueError("candidate '" + std::string(text) + "' needs kind, kernel" + (op.is_conv() ? ", filters" : ""));
    op.kernel = KeyValues::to_number<std::size_t>(parts[1], "kernel");
    if (op.is_conv()) op.filters = KeyValues::to_number<std::size_t>(parts[2], "filters");
    return op;
  }
};

inline std::string grid_to_string(const std::vector<OpSpec>& grid) {
  std::string out;
  for (const auto& op : grid) out += (out.empty() ? "" : ", ") + op.to_string();
  return out;
}

inline std::vector<OpSpec> parse_grid(std::string_view text) {
  std::vector<OpSpec> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto comma = std::min(text.find(',', pos), text.size());
    const auto item = trim(text.substr(pos, comma - pos));
    if (!item.empty()) out.push_back(OpSpec::parse(item));
    pos = comma + 1;
  }
  return out;
}

enum class CellKind { kConv, kReduction };

template <typename T>
struct CandidateOp {
  OpSpec spec;
  Conv1dParams<T> conv;          // normal conv only
  SeparableConv1dParams<T> sep;  // separable conv only

  std::vector<Tensor<T>*> params() {
    switch (spec.kind) {
      case OpKind::kNormalConv: return {&conv.weight, &conv.bias};
      case OpKind::kSeparableConv: return {&sep.depthwise, &sep.pointwise, &sep.bias};
      default: return {};
    }
  }
};

/// One mixed edge: Y = sum_i softmax(alpha)_i o_i(X). Conv candidates emit
/// relu(conv(X)) zero-padded on channels up to `out_channels`.
template <typename T>
struct Cell {
  CellKind kind = CellKind::kConv;
  std::vector<CandidateOp<T>> candidates;
  Tensor<T> alpha;
  std::size_t in_channels = 0;
  std::size_t out_channels = 0;

  Tensor<T> mixture_weights() const { return softmax(alpha); }
};

struct SearchConfig {
  std::size_t max_filters = 64;
  std::size_t max_kernel = 32;
  std::vector<OpSpec> conv_grid;
  std::vector<OpSpec> reduction_grid;
  std::string layout = "ccrccr";  // c = conv cell, r = reduction cell
  std::size_t classes = 5;
  double lr_alpha = 1e-3;
  double lr_theta = 1e-3;
  std::size_t steps = 500;
  std::size_t batch = 4;
  std::uint64_t seed = 1;
  std::size_t crop = 0;  // random training window per epoch; 0 uses whole epochs

  static SearchConfig defaults() {
    SearchConfig c;
    for (OpKind kind : {OpKind::kNormalConv, OpKind::kSeparableConv})
      for (std::size_t k : {8u, 16u, 32u})
        for (std::size_t f : {16u, 32u, 64u}) c.conv_grid.push_back({kind, k, f});
    c.reduction_grid = {{OpKind::kMaxPool, 4, 0}, {OpKind::kAvgPool, 4, 0}};
    return c;
  }

  void validate() const {
    if (layout.empty()) throw ValueError("search: empty cell layout");
    for (char ch : layout) {
      if (ch != 'c' && ch != 'r') throw ValueError("search: layout may only contain 'c' and 'r'");
    }
    if (layout.find('c') != std::string::npos && conv_grid.size() < 2) {
      throw ValueError("search: conv cells need at least 2 candidates");
    }
    if (layout.find('r') != std::string::npos && reduction_grid.size() < 2) {
      throw ValueError("search: reduction cells need at least 2 candidates");
    }
    for (const auto& op : conv_grid) {
      if (!op.is_conv()) throw ValueError("search: conv grid holds a pooling op");
      if (op.kernel == 0 || op.kernel > max_kernel || op.filters == 0 || op.filters > max_filters) {
        throw ValueError("search: candidate " + op.to_string() + " exceeds the kernel/filter caps");
      }
    }
    for (const auto& op : reduction_grid) {
      if (op.is_conv()) throw ValueError("search: reduction grid holds a conv op");
      if (op.kernel == 0) throw ValueError("search: pool window must be positive");
    }
    if (classes < 2) throw ValueError("search: need at least 2 classes");
    if (batch == 0) throw ValueError("search: batch must be positive");
  }

  KeyValues to_kv() const {
    KeyValues kv;
    kv.set("layout", layout);
    kv.set("steps", std::to_string(steps));
    kv.set("batch", std::to_string(batch));
    kv.set("lr_alpha", format_number(lr_alpha));
    kv.set("lr_theta", format_number(lr_theta));
    kv.set("seed", std::to_string(seed));
    kv.set("crop", std::to_string(crop));
    kv.set("classes", std::to_string(classes));
    kv.set("max_filters", std::to_string(max_filters));
    kv.set("max_kernel", std::to_string(max_kernel));
    kv.set("conv_grid", grid_to_string(conv_grid));
    kv.set("reduction_grid", grid_to_string(reduction_grid));
    return kv;
  }

  /// Missing keys keep their defaults(); unknown keys are rejected.
  static SearchConfig from_kv(const KeyValues& kv) {
    static const std::set<std::string, std::less<>> known = {
        "layout", "steps", "batch", "lr_alpha", "lr_theta", "seed", "crop",
        "classes", "max_filters", "max_kernel", "conv_grid", "reduction_grid"};
    for (const auto& [k, v] : kv.entries())
      if (!known.count(k)) throw ValueError("search config: unknown key '" + k + "'");
    SearchConfig c = defaults();
    c.layout = kv.get_or("layout", c.layout);
    c.steps = kv.number_or("steps", c.steps);
    c.batch = kv.number_or("batch", c.batch);
    c.lr_alpha = kv.number_or("lr_alpha", c.lr_alpha);
    c.lr_theta = kv.number_or("lr_theta", c.lr_theta);
    c.seed = kv.number_or("seed", c.seed);
    c.crop = kv.number_or("crop", c.crop);
    c.classes = kv.number_or("classes", c.classes);
    c.max_filters = kv.number_or("max_filters", c.max_filters);
    c.max_kernel = kv.number_or("max_kernel", c.max_kernel);
    if (kv.has("conv_grid")) c.conv_grid = parse_grid(kv.get("conv_grid"));
    if (kv.has("reduction_grid")) c.reduction_grid = parse_grid(kv.get("reduction_grid"));
    c.validate();
    return c;
  }
};

template <typename T>
struct SearchNetwork {
  std::vector<Cell<T>> cells;
  DenseParams<T> head;  // after global average pooling
  std::size_t input_len = 0;

  std::vector<Tensor<T>*> alpha_params() {
    std::vector<Tensor<T>*> out;
    for (auto& c : cells) out.push_back(&c.alpha);
    return out;
  }

  std::vector<Tensor<T>*> theta_params() {
    std::vector<Tensor<T>*> out;
    for (auto& c : cells)
      for (auto& op : c.candidates)
        for (auto* p : op.params()) out.push_back(p);
    out.push_back(&head.weight);
    out.push_back(&head.bias);
    return out;
  }
};

/// Zero alpha (equal mixture) and He-uniform candidate weights.
template <typename T>
SearchNetwork<T> build_search_network(const SearchConfig& config, std::size_t input_len) {
  config.validate();
  Rng rng(config.seed);
  SearchNetwork<T> net;
  net.input_len = input_len;
  std::size_t ch = 1, len = input_len;
  for (std::size_t ci = 0; ci < config.layout.size(); ++ci) {
    Cell<T> cell;
    cell.in_channels = ch;
    if (config.layout[ci] == 'c') {
      cell.kind = CellKind::kConv;
      std::size_t widest = 0;
      for (const auto& spec : config.conv_grid) {
        CandidateOp<T> op{spec, {}, {}};
        if (spec.kind == OpKind::kNormalConv) {
          op.conv = {Tensor<T>(Shape{spec.filters, ch, spec.kernel}), Tensor<T>(Shape{spec.filters})};
          fill_he_uniform(op.conv.weight, rng, ch * spec.kernel);
        } else {
          op.sep = {Tensor<T>(Shape{ch, spec.kernel}), Tensor<T>(Shape{spec.filters, ch}),
                    Tensor<T>(Shape{spec.filters})};
          fill_he_uniform(op.sep.depthwise, rng, spec.kernel);
          fill_he_uniform(op.sep.pointwise, rng, ch);
        }
        widest = std::max(widest, spec.filters);
        cell.candidates.push_back(std::move(op));
      }
      cell.out_channels = widest;
    } else {
      cell.kind = CellKind::kReduction;
      const std::size_t window = config.reduction_grid.front().kernel;
      for (const auto& spec : config.reduction_grid) {
        if (spec.kernel != window) {
          throw ShapeError("search: reduction candidates in cell " + std::to_string(ci) +
                           " use different windows and cannot be mixed");
        }
        cell.candidates.push_back({spec, {}, {}});
      }
      if (window > len) {
        throw ShapeError("search: cell " + std::to_string(ci) + " pools length " +
                         std::to_string(len) + " with window " + std::to_string(window));
      }
      len /= window;
      cell.out_channels = ch;
    }
    cell.alpha = Tensor<T>(Shape{cell.candidates.size()});
    ch = cell.out_channels;
    net.cells.push_back(std::move(cell));
  }
  net.head = DenseParams<T>::glorot(ch, config.classes, rng);
  return net;
}

/// Per-candidate pre-activation outputs kept by the forward pass so the
/// backward pass does not recompute them.
template <typename T>
struct MixedCellCache {
  std::vector<Tensor<T>> raw;
};

namespace detail {

template <typename T>
Tensor<T> candidate_raw(const CandidateOp<T>& op, const Tensor<T>& x) {
  switch (op.spec.kind) {
    case OpKind::kNormalConv: return conv1d(x, op.conv);
    case OpKind::kSeparableConv: return separable_conv1d(x, op.sep);
    case OpKind::kMaxPool: return pool1d(x, PoolKind::kMax, op.spec.kernel);
    case OpKind::kAvgPool: return pool1d(x, PoolKind::kAvg, op.spec.kernel);
  }
  throw ValueError("unknown candidate kind");
}

}  // namespace detail

template <typename T>
Tensor<T> mixed_cell_forward(const Cell<T>& cell, const Tensor<T>& x,
                             MixedCellCache<T>* cache = nullptr) {
  if (cell.alpha.size() != cell.candidates.size() || cell.candidates.size() < 2) {
    throw ShapeError("mixed cell: alpha length must equal candidate count (>= 2)");
  }
  const auto d = signal_dims(x, "mixed_cell_forward");
  if (d.channels != cell.in_channels) {
    throw ShapeError("mixed cell: expected " + std::to_string(cell.in_channels) +
                     " input channels, got " + std::to_string(d.channels));
  }
  const Tensor<T> w = cell.mixture_weights();
  Tensor<T> y;
  std::size_t out_len = 0;
  if (cache) cache->raw.clear();
  for (std::size_t i = 0; i < cell.candidates.size(); ++i) {
    Tensor<T> raw = detail::candidate_raw(cell.candidates[i], x);
    const auto rd = signal_dims(raw, "mixed_cell_forward");
    if (y.empty()) {
      out_len = rd.length;
      y = Tensor<T>(signal_shape(d, cell.out_channels, out_len));
    } else if (rd.length != out_len) {
      throw ShapeError("mixed cell: candidate " + cell.candidates[i].spec.to_string() +
                       " produces length " + std::to_string(rd.length) + ", expected " +
                       std::to_string(out_len));
    }
    if (rd.channels > cell.out_channels) {
      throw ShapeError("mixed cell: candidate has more channels than the cell output");
    }
    const bool conv = cell.candidates[i].spec.is_conv();
    for (std::size_t b = 0; b < d.batch; ++b)
      for (std::size_t c = 0; c < rd.channels; ++c) {
        const T* r = raw.data() + (b * rd.channels + c) * out_len;
        T* yr = y.data() + (b * cell.out_channels + c) * out_len;
        for (std::size_t l = 0; l < out_len; ++l) {
          const T v = conv ? std::max(r[l], T(0)) : r[l];
          yr[l] += w[i] * v;
        }
      }
    if (cache) cache->raw.push_back(std::move(raw));
  }
  return y;
}

template <typename T>
struct MixedCellGrads {
  Tensor<T> input;
  Tensor<T> alpha;
  std::vector<std::vector<Tensor<T>>> candidates;  // aligned with CandidateOp::params()
};

/// dL/dalpha_j = w_j (g_j - sum_i w_i g_i) with g_i = <dY, o_i(X)>.
template <typename T>
MixedCellGrads<T> mixed_cell_backward(const Cell<T>& cell, const Tensor<T>& x,
                                      const Tensor<T>& dy,
                                      const MixedCellCache<T>* cache = nullptr) {
  MixedCellCache<T> local;
  if (!cache || cache->raw.size() != cell.candidates.size()) {
    mixed_cell_forward(cell, x, &local);
    cache = &local;
  }
  const auto d = signal_dims(x, "mixed_cell_backward");
  const auto yd = signal_dims(dy, "mixed_cell_backward");
  if (yd.channels != cell.out_channels || yd.batch != d.batch) {
    throw ShapeError("mixed cell: upstream gradient shape mismatch");
  }
  const std::size_t n = cell.candidates.size(), out_len = yd.length;
  const Tensor<T> w = cell.mixture_weights();
  MixedCellGrads<T> g{Tensor<T>(x.shape()), Tensor<T>(cell.alpha.shape()), {}};
  std::vector<double> inner(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& op = cell.candidates[i];
    const Tensor<T>& raw = cache->raw[i];
    const auto rd = signal_dims(raw, "mixed_cell_backward");
    if (rd.length != out_len) throw ShapeError("mixed cell: cached output length mismatch");
    const bool conv = op.spec.is_conv();
    Tensor<T> draw(raw.shape());
    double acc = 0;
    for (std::size_t b = 0; b < d.batch; ++b)
      for (std::size_t c = 0; c < rd.channels; ++c) {
        const T* r = raw.data() + (b * rd.channels + c) * out_len;
        const T* gy = dy.data() + (b * cell.out_channels + c) * out_len;
        T* dr = draw.data() + (b * rd.channels + c) * out_len;
        for (std::size_t l = 0; l < out_len; ++l) {
          const bool active = !conv || r[l] > T(0);
          const T o = active ? r[l] : T(0);
          acc += static_cast<double>(gy[l]) * static_cast<double>(o);
          dr[l] = active ? w[i] * gy[l] : T(0);
        }
      }
    inner[i] = acc;
    std::vector<Tensor<T>> pg;
    Tensor<T> dx;
    switch (op.spec.kind) {
      case OpKind::kNormalConv: {
        auto cg = conv1d_backward(x, op.conv, draw);
        dx = std::move(cg.input);
        pg = {std::move(cg.weight), std::move(cg.bias)};
        break;
      }
      case OpKind::kSeparableConv: {
        auto sg = separable_conv1d_backward(x, op.sep, draw);
        dx = std::move(sg.input);
        pg = {std::move(sg.depthwise), std::move(sg.pointwise), std::move(sg.bias)};
        break;
      }
      case OpKind::kMaxPool: dx = pool1d_backward(x, PoolKind::kMax, op.spec.kernel, draw); break;
      case OpKind::kAvgPool: dx = pool1d_backward(x, PoolKind::kAvg, op.spec.kernel, draw); break;
    }
    for (std::size_t j = 0; j < dx.size(); ++j) g.input[j] += dx[j];
    g.candidates.push_back(std::move(pg));
  }
  double mean = 0;
  for (std::size_t i = 0; i < n; ++i) mean += static_cast<double>(w[i]) * inner[i];
  for (std::size_t j = 0; j < n; ++j) g.alpha[j] = static_cast<T>(w[j] * (inner[j] - mean));
  return g;
}

/// Logits [B, classes] for a batch [B, 1, L].
template <typename T>
Tensor<T> search_forward(const SearchNetwork<T>& net, const Tensor<T>& x) {
  Tensor<T> h = x;
  for (const auto& cell : net.cells) h = mixed_cell_forward(cell, h);
  return dense(global_avg_pool(h), net.head);
}

/// One single-level update: the same batch and loss drive both the alpha and
/// the weight optimizer. A null `opt_alpha` freezes alpha. Returns the loss
/// before the update.
template <typename T>
double search_step(SearchNetwork<T>& net, const Tensor<T>& x, std::span<const int> labels,
                   std::type_identity_t<AdamState<T>>* opt_alpha, AdamState<T>& opt_theta,
                   std::size_t step_index = 0) {
  if (x.rank() != 3 || x.dim(0) == 0 || x.dim(0) != labels.size()) {
    throw ShapeError("search_step: expected batch [B, 1, L] with B labels");
  }
  const std::size_t n_cells = net.cells.size();
  std::vector<Tensor<T>> inputs;
  std::vector<MixedCellCache<T>> caches(n_cells);
  inputs.reserve(n_cells + 1);
  inputs.push_back(x);
  for (std::size_t i = 0; i < n_cells; ++i)
    inputs.push_back(mixed_cell_forward(net.cells[i], inputs.back(), &caches[i]));
  const Tensor<T> pooled = global_avg_pool(inputs.back());
  const Tensor<T> logits = dense(pooled, net.head);
  auto ce = softmax_cross_entropy(logits, labels);
  if (!std::isfinite(ce.loss)) throw NumericError("search: non-finite loss", step_index);

  auto hg = dense_backward(pooled, net.head, ce.grad);
  net.head.weight.set_grad(hg.weight);
  net.head.bias.set_grad(hg.bias);
  Tensor<T> dh = global_avg_pool_backward(inputs.back(), hg.input);
  for (std::size_t i = n_cells; i-- > 0;) {
    auto& cell = net.cells[i];
    auto cg = mixed_cell_backward(cell, inputs[i], dh, &caches[i]);
    cell.alpha.set_grad(cg.alpha);
    for (std::size_t k = 0; k < cell.candidates.size(); ++k) {
      auto params = cell.candidates[k].params();
      for (std::size_t p = 0; p < params.size(); ++p) params[p]->set_grad(cg.candidates[k][p]);
    }
    dh = std::move(cg.input);
  }
  auto theta = net.theta_params();
  adam_step(theta, opt_theta);
  if (opt_alpha) {
    auto alphas = net.alpha_params();
    adam_step(alphas, *opt_alpha);
  }
  return ce.loss;
}

struct CellChoice {
  std::size_t cell = 0;
  CellKind kind = CellKind::kConv;
  std::size_t index = 0;  // winning candidate
  OpSpec op;
  std::vector<double> alpha;
};

/// Argmax of alpha per cell; ties go to the lowest index.
template <typename T>
std::vector<CellChoice> finalize_architecture(const SearchNetwork<T>& net) {
  std::vector<CellChoice> out;
  for (std::size_t i = 0; i < net.cells.size(); ++i) {
    const auto& cell = net.cells[i];
    std::size_t best = 0;
    for (std::size_t j = 1; j < cell.alpha.size(); ++j)
      if (cell.alpha[j] > cell.alpha[best]) best = j;
    CellChoice c{i, cell.kind, best, cell.candidates[best].spec, {}};
    for (T a : cell.alpha.values()) c.alpha.push_back(static_cast<double>(a));
    out.push_back(std::move(c));
  }
  return out;
}

/// Trajectory callback: step index (1-based, after the update), the loss
/// before the update, and the network after it.
using SearchLogger = std::function<void(std::size_t, double, const SearchNetwork<float>&)>;

/// Single-level search over labelled epochs: every step draws `batch` random
/// epochs (and a random `crop`-sample window of each when crop > 0) and
/// updates alpha and theta together.
inline SearchNetwork<float> run_search(const SearchConfig& cfg, std::span<const EpochRecording> recs,
                                       const SearchLogger& log = {}) {
  cfg.validate();
  std::vector<std::pair<std::size_t, std::size_t>> refs;
  std::size_t len = 0;
  for (std::size_t r = 0; r < recs.size(); ++r) {
    if (recs[r].size() && len && recs[r].epoch_len != len) throw ShapeError("search: recordings differ in epoch length");
    if (recs[r].size()) len = recs[r].epoch_len;
    for (std::size_t i = 0; i < recs[r].size(); ++i) refs.emplace_back(r, i);
  }
  if (refs.empty()) throw ValueError("search: no labelled epochs");
  if (cfg.crop > len) throw ValueError("search: crop exceeds the epoch length");
  const std::size_t win = cfg.crop ? cfg.crop : len;
  auto net = build_search_network<float>(cfg, win);
  AdamState<float> opt_alpha(cfg.lr_alpha), opt_theta(cfg.lr_theta);
  Rng rng(cfg.seed + 1000);
  Tensor<float> x(Shape{cfg.batch, 1, win});
  std::vector<int> labels(cfg.batch);
  for (std::size_t step = 0; step < cfg.steps; ++step) {
    for (std::size_t b = 0; b < cfg.batch; ++b) {
      const auto [r, i] = refs[rng.index(refs.size())];
      const std::size_t off = win < len ? rng.index(len - win + 1) : 0;
      const auto e = recs[r].epoch(i);
      std::copy_n(e.data() + off, win, x.data() + b * win);
      labels[b] = recs[r].stages[i];
      if (labels[b] < 0 || static_cast<std::size_t>(labels[b]) >= cfg.classes)
        throw ValueError("search: label " + std::to_string(labels[b]) + " out of range");
    }
    const double loss = search_step(net, x, labels, &opt_alpha, opt_theta, step + 1);
    if (log) log(step + 1, loss, net);
  }
  return net;
}

/// Maps chosen cells onto model blocks. A normal conv becomes a start-kind
/// block (no built-in pool); a separable conv becomes an identity block when
/// its filters equal the running channel count, otherwise a conv block; each
/// reduction becomes a pool layer.
inline MorpheusConfig export_config(const std::vector<CellChoice>& choices,
                                    std::size_t input_len = 3000) {
  MorpheusConfig cfg;
  cfg.input_len = input_len;
  std::size_t ch = 1;
  for (const auto& c : choices) {
    switch (c.op.kind) {
      case OpKind::kNormalConv:
        cfg.layers.push_back(LayerSpec::start(c.op.filters, c.op.kernel, 0));
        ch = c.op.filters;
        break;
      case OpKind::kSeparableConv:
        if (c.op.filters == ch) {
          cfg.layers.push_back(LayerSpec::identity_block(c.op.filters, c.op.kernel));
        } else {
          cfg.layers.push_back(LayerSpec::conv_block(c.op.filters, c.op.kernel));
          ch = c.op.filters;
        }
        break;
      case OpKind::kMaxPool: cfg.layers.push_back(LayerSpec::pooling(PoolKind::kMax, c.op.kernel)); break;
      case OpKind::kAvgPool: cfg.layers.push_back(LayerSpec::pooling(PoolKind::kAvg, c.op.kernel)); break;
    }
  }
  return cfg;
}

}  // namespace morpheus::nas
