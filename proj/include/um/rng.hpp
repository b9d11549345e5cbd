#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace um {

/**
 * Derives a child seed from (parent seed, stream index) with a SplitMix64
 * finalizer.  Used to split one master seed into per-run seeds and each
 * run seed into per-agent streams without correlated output.  Streams
 * derived from distinct indices are independent for practical purposes;
 * the same (seed, stream) pair always yields the same child.
 */
inline std::uint64_t split_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

/**
 * Seeded random stream.  Wraps std::mt19937_64 but applies its own
 * variate transforms: the standard library distributions are
 * implementation-defined, which would break byte-level reproducibility
 * of recorded runs across toolchains.  Everything the simulator draws
 * goes through this class.
 */
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : engine_(seed) {}

  // Uniform on [0,1) with 53 random bits.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Uniform integer on [lo, hi], endpoints included.  Rejection keeps it unbiased.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    const std::uint64_t limit = std::uint64_t(-1) - std::uint64_t(-1) % span;
    std::uint64_t draw;
    do {
      draw = engine_();
    } while (draw >= limit);
    return lo + static_cast<std::int64_t>(draw % span);
  }

  // Standard normal via Box-Muller.  Uses the cosine branch only so each
  // call consumes exactly two uniforms; no state carried between calls.
  double normal() {
    double u1;
    do {
      u1 = uniform01();
    } while (u1 <= 0.0);
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace um
