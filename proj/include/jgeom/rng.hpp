// Seeded random numbers with platform-independent output.
//
// std::uniform_real_distribution and std::normal_distribution are
// implementation-defined, so the transforms from raw engine bits live here.

#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

#include "jgeom/linalg.hpp"

namespace jgeom {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller; the second variate is cached.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

  Vector normal_vector(std::size_t n) {
    Vector v(n);
    for (double& x : v) x = normal();
    return v;
  }

  /// Uniform point on the unit sphere S^{n-1}.
  Vector unit_vector(std::size_t n) {
    for (;;) {
      Vector v = normal_vector(n);
      const double len = norm(v);
      if (len > 1e-8) return (1.0 / len) * v;
    }
  }

  std::uint64_t next_seed() { return engine_(); }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace jgeom
