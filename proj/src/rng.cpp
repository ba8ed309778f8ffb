#include "laprep/rng.hpp"

#include <cmath>
#include <limits>

#include "laprep/error.hpp"

namespace laprep {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t fnv1a64(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t substream_seed(std::uint64_t seed, std::string_view name) {
  return splitmix64(splitmix64(seed) ^ fnv1a64(name));
}

std::size_t uniform_index(Rng& rng, std::size_t n) {
  if (n == 0) fail(ErrorCode::InvalidArgument, "uniform_index over an empty range");
  std::uniform_int_distribution<std::size_t> dist(0, n - 1);
  return dist(rng);
}

double uniform_open_closed(Rng& rng) {
  // generate_canonical is in [0, 1); flip to (0, 1].
  return 1.0 - std::generate_canonical<double, std::numeric_limits<double>::digits>(rng);
}

std::size_t geometric_tau(Rng& rng, double lambda) {
  if (!(lambda >= 0.0 && lambda < 1.0)) {
    fail(ErrorCode::InvalidArgument, "lambda must lie in [0, 1)");
  }
  // Consume one draw even for lambda = 0 so streams stay aligned across lambdas.
  const double u = uniform_open_closed(rng);
  if (lambda == 0.0) return 1;
  const double k = std::floor(std::log(u) / std::log(lambda));
  if (k >= static_cast<double>(std::numeric_limits<std::size_t>::max() / 2)) {
    return std::numeric_limits<std::size_t>::max() / 2;
  }
  return 1 + static_cast<std::size_t>(k);
}

}  // namespace laprep
