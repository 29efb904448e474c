// Deterministic random number utilities.
//
// All randomness in the library flows through mt19937_64 (bit-exact per the
// C++ standard) plus hand-written distribution transforms, so identical seeds
// give identical streams on every conforming platform. std::normal_distribution
// is implementation-defined and is deliberately not used.
#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace fsde {

// splitmix64 finalizer; used to derive independent per-path seeds from a
// master seed: seed_i = mix_seed(master, i). Documented contract: Monte Carlo
// results depend only on (master, path index), never on thread schedule.
inline std::uint64_t mix_seed(std::uint64_t master, std::uint64_t index) {
  std::uint64_t z = master + (index + 1) * 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // uniform on [0,1) with 53-bit resolution
  double uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // standard normal via Box-Muller (no caching, fixed draw order)
  double gauss() {
    double u1 = 1.0 - uniform01();  // (0,1]
    double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
  }

  std::uint64_t bits() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace fsde
