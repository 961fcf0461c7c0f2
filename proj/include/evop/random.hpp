#pragma once

#include <cstdint>
#include <random>

namespace evop {

/// SplitMix64 finalizer.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

/// Seed of stream `counter` under `master`. Counter-based, so the seed of
/// stream k does not depend on how many other streams exist.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t counter) {
  return splitmix64(master ^ splitmix64(counter));
}

using Rng = std::mt19937_64;

inline constexpr const char* kRngName = "mt19937_64/splitmix64-derive";

/// Uniform double in [0, 1) from the top 53 bits. Used instead of
/// std::uniform_real_distribution so streams are identical across stdlibs.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline bool bernoulli(Rng& rng, double p) { return uniform01(rng) < p; }

}  // namespace evop
