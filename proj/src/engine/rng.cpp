#include "rangesim/engine/rng.hpp"

#include <cmath>

namespace rangesim {

namespace {
constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;
}

std::uint64_t splitmix64_mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t fnv1a64(std::string_view text) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

RngStream::RngStream(std::uint64_t seed, std::string key)
    : seed_(seed), key_(std::move(key)), base_(splitmix64_mix(seed ^ splitmix64_mix(fnv1a64(key_)))) {}

std::uint64_t RngStream::next_u64() {
  ++counter_;
  return splitmix64_mix(base_ + counter_ * kGamma);
}

std::uint64_t RngStream::uniform(std::uint64_t bound) {
  if (bound == 0) throw ZeroBoundError("rng bound must be >= 1");
  if (bound == 1) {
    next_u64();
    return 0;
  }
  std::uint64_t x = next_u64();
  __uint128_t m = static_cast<__uint128_t>(x) * bound;
  std::uint64_t low = static_cast<std::uint64_t>(m);
  if (low < bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    while (low < threshold) {
      x = next_u64();
      m = static_cast<__uint128_t>(x) * bound;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

double RngStream::unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

SimTime RngStream::exponential(SimTime mean) {
  const double u = unit();
  const double sample = -std::log1p(-u) * static_cast<double>(mean.ns());
  const double rounded = std::floor(sample + 0.5);
  if (rounded < 1.0) return SimTime(1);
  if (rounded >= 1.8e19) return SimTime::max();
  return SimTime(static_cast<std::uint64_t>(rounded));
}

}  // namespace rangesim
