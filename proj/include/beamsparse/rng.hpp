/**
 * @file rng.hpp
 * @brief Deterministic random draws. Distributions are implemented on top of
 * the raw mt19937_64 stream so that outputs are identical across standard
 * library implementations.
 */
#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>

#include "beamsparse/channel.hpp"

namespace beamsparse {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1) with 53-bit resolution.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller (no cached second value, so the draw
  /// sequence is a pure function of the engine stream).
  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
  }

  /// Circularly symmetric complex Gaussian, CN(0, variance).
  Complex cnormal(double variance = 1.0) {
    const double s = std::sqrt(variance / 2.0);
    return {s * normal(), s * normal()};
  }

  CVec cnormal_vector(int n, double variance = 1.0) {
    CVec v(n);
    for (int i = 0; i < n; ++i) v(i) = cnormal(variance);
    return v;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace beamsparse
