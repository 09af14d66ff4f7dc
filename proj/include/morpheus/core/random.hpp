// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The MorpheusNet Authors

#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "morpheus/core/tensor.hpp"

namespace morpheus {

/// Seeded generator shared by every randomized routine. Same seed, same
/// stream, same results.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform(double lo = 0.0, double hi = 1.0) {
    return std::uniform_real_distribution<double>(lo, hi)(engine_);
  }
  double normal(double mean = 0.0, double stddev = 1.0) {
    return std::normal_distribution<double>(mean, stddev)(engine_);
  }
  bool bernoulli(double p) { return std::bernoulli_distribution(p)(engine_); }
  std::size_t index(std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(engine_);
  }
  std::uint64_t next() { return engine_(); }

  template <typename It>
  void shuffle(It first, It last) {
    std::shuffle(first, last, engine_);
  }

  std::mt19937_64& engine() noexcept { return engine_; }

 private:
  std::mt19937_64 engine_;
};

template <typename T>
void fill_uniform(Tensor<T>& t, Rng& rng, double lo, double hi) {
  for (auto& v : t.values()) v = static_cast<T>(rng.uniform(lo, hi));
}

/// He-style uniform init: U(-sqrt(6/fan_in), +sqrt(6/fan_in)).
template <typename T>
void fill_he_uniform(Tensor<T>& t, Rng& rng, std::size_t fan_in) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in));
  fill_uniform(t, rng, -limit, limit);
}

/// Glorot uniform init over (fan_in + fan_out).
template <typename T>
void fill_glorot_uniform(Tensor<T>& t, Rng& rng, std::size_t fan_in,
                         std::size_t fan_out) {
  const double limit =
      std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  fill_uniform(t, rng, -limit, limit);
}

}  // namespace morpheus
