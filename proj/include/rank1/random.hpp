#pragma once

#include <cstdint>
#include <random>

namespace rank1 {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer (Steele, Lea & Flood). Bijective on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

enum class StreamTag : std::uint64_t { env = 0x656E76ULL, policy = 0x706F6C6963ULL };

/// Child seed for one run's stream:
///   mix64(mix64(mix64(master) ^ run_index) ^ tag)
/// where tag is the ASCII of "env" or "policy" read as a big-endian integer.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t run_index, StreamTag tag) {
  return mix64(mix64(mix64(master) ^ run_index) ^ static_cast<std::uint64_t>(tag));
}

// The std distributions are implementation-defined, so draws are built
// directly on the engine output to keep traces identical across toolchains.

/// Uniform double in [0,1) with 53 random bits.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline bool bernoulli(Rng& rng, double p) { return uniform01(rng) < p; }

/// Uniform integer in [0, bound), Lemire's multiply-shift with rejection.
inline std::uint64_t uniform_index(Rng& rng, std::uint64_t bound) {
  auto product = static_cast<unsigned __int128>(rng()) * bound;
  auto low = static_cast<std::uint64_t>(product);
  if (low < bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    while (low < threshold) {
      product = static_cast<unsigned __int128>(rng()) * bound;
      low = static_cast<std::uint64_t>(product);
    }
  }
  return static_cast<std::uint64_t>(product >> 64);
}

}  // namespace rank1
