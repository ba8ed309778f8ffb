#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string_view>

namespace laprep {

using Rng = std::mt19937_64;

/// Seed of the named substream derived from a run seed (splitmix64 over the
/// seed mixed with an FNV-1a hash of the name).
std::uint64_t substream_seed(std::uint64_t seed, std::string_view name);

inline Rng make_stream(std::uint64_t seed, std::string_view name) {
  return Rng(substream_seed(seed, name));
}

std::uint64_t fnv1a64(std::string_view text);

/// Uniform integer in [0, n).
std::size_t uniform_index(Rng& rng, std::size_t n);

/// Uniform real in (0, 1].
double uniform_open_closed(Rng& rng);

/// Geometric draw on {1, 2, ...} with Pr(k) = lambda^(k-1) (1 - lambda),
/// by inverse CDF: k = 1 + floor(log U / log lambda). lambda = 0 gives 1.
std::size_t geometric_tau(Rng& rng, double lambda);

}  // namespace laprep
