#pragma once

#include <cstdint>
#include <random>

namespace dccsim {

/// SplitMix64 finaliser; derives independent per-vehicle/per-purpose seeds so
/// that adding a vehicle never perturbs another vehicle's stream.
constexpr std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t id = 0) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1) + 0xBF58476D1CE4E5B9ULL * (id + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

enum class RngStream : std::uint64_t { Placement = 1, Speed, CaPhase, TrafficPhase, ChannelLoss };

inline std::mt19937_64 make_rng(std::uint64_t seed, RngStream stream, std::uint64_t id = 0) {
  return std::mt19937_64{mix_seed(seed, static_cast<std::uint64_t>(stream), id)};
}

}  // namespace dccsim
