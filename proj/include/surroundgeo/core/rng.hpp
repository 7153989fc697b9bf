#pragma once

#include <Eigen/Core>
#include <cmath>
#include <cstdint>

namespace surroundgeo {

// Counter-based generator: output i depends only on (key, i), so forked
// streams and parallel trials are order-independent and replayable.
class Rng {
 public:
  explicit Rng(uint64_t key) : key_(key) {}

  // Derived stream; fork(a) != fork(b) for a != b under the same key.
  Rng fork(uint64_t stream) const { return Rng(mix(key_, stream ^ 0x9e3779b97f4a7c15ull)); }

  uint64_t next_u64() { return mix(key_, counter_++); }

  // Uniform in [0, 1).
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal via Box-Muller (no cached spare: keeps the stream
  // position a pure function of the draw count).
  double gaussian() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  double gaussian(double sigma) { return sigma * gaussian(); }

  // Uniform integer in [0, n).
  uint64_t below(uint64_t n) { return next_u64() % n; }

  Eigen::Vector2d uniform_vec2(double lo, double hi) {
    const double a = uniform(lo, hi), b = uniform(lo, hi);
    return {a, b};
  }

  Eigen::Vector3d uniform_vec3(double lo, double hi) {
    const double a = uniform(lo, hi), b = uniform(lo, hi), c = uniform(lo, hi);
    return {a, b, c};
  }

  Eigen::Vector3d gaussian_vec3(double sigma) {
    const double a = gaussian(sigma), b = gaussian(sigma), c = gaussian(sigma);
    return {a, b, c};
  }

  Eigen::Vector3d unit_vector() {
    const double z = uniform(-1.0, 1.0);
    const double phi = uniform(0.0, 2.0 * M_PI);
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    return {r * std::cos(phi), r * std::sin(phi), z};
  }

  static uint64_t mix(uint64_t key, uint64_t ctr) {
    uint64_t z = key + 0x9e3779b97f4a7c15ull * (ctr + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

 private:
  uint64_t key_;
  uint64_t counter_ = 0;
};

}  // namespace surroundgeo
