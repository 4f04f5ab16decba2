#pragma once

#include <cmath>
#include <random>

#include "fas/tensor.hpp"

namespace fas {

/// Seedable RNG shared by weight init, data generation and training.
/// A single engine per run keeps every draw on one deterministic stream.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(engine_);
  }

  double normal(double mean, double stddev) {
    return std::normal_distribution<double>(mean, stddev)(engine_);
  }

  std::size_t index(std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(engine_);
  }

  std::mt19937_64& engine() { return engine_; }

private:
  std::mt19937_64 engine_;
};

/// Convolution weight init: uniform in [-s, s], s = sqrt(1 / fan_in) with
/// fan_in = in_ch * kh * kw.
inline Tensor init_conv_weights(Shape shape, Rng& rng) {
  const double s =
      std::sqrt(1.0 / static_cast<double>(shape.c * shape.h * shape.w));
  Tensor t(shape);
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = rng.uniform(-s, s);
  return t;
}

/// Fully connected weight init: uniform in [-s, s], s = sqrt(1 / fan_in).
inline Tensor init_fc_weights(std::size_t out_dim, std::size_t in_dim,
                              Rng& rng) {
  const double s = std::sqrt(1.0 / static_cast<double>(in_dim));
  Tensor t(Shape{out_dim, in_dim, 1, 1});
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = rng.uniform(-s, s);
  return t;
}

}  // namespace fas
