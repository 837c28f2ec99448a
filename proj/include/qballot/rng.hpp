#pragma once

#include <cstdint>
#include <random>

namespace qballot {

using Rng = std::mt19937_64;

// SplitMix64 finalizer.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Per-trial seed: splitmix64(master ^ splitmix64(trial)). Trials are independent of
/// execution order, so aggregates do not depend on scheduling.
constexpr std::uint64_t trial_seed(std::uint64_t master, std::uint64_t trial) noexcept {
  return splitmix64(master ^ splitmix64(trial));
}

inline Rng trial_rng(std::uint64_t master, std::uint64_t trial) { return Rng(trial_seed(master, trial)); }

}  // namespace qballot
