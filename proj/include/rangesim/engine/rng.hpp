#pragma once

// Counter-based keyed random streams. Draw i of a stream is
// splitmix64(base + (i + 1) * gamma) where base mixes the run seed with a
// hash of the stream key, so each stream's output is a pure function of
// (seed, key, draw index) and no stream can perturb another.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

#include "rangesim/engine/sim_time.hpp"

namespace rangesim {

class ZeroBoundError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

std::uint64_t splitmix64_mix(std::uint64_t z);
std::uint64_t fnv1a64(std::string_view text);

class RngStream {
 public:
  RngStream(std::uint64_t seed, std::string key);

  std::uint64_t seed() const { return seed_; }
  const std::string& key() const { return key_; }
  std::uint64_t draws() const { return counter_; }

  std::uint64_t next_u64();

  /// Uniform integer in [0, bound). Unbiased (Lemire's multiply-and-reject),
  /// so a draw may consume more than one counter step.
  std::uint64_t uniform(std::uint64_t bound);

  /// Uniform integer in [lo, hi], inclusive.
  std::uint64_t uniform_range(std::uint64_t lo, std::uint64_t hi) { return lo + uniform(hi - lo + 1); }

  /// Uniform double in [0, 1) with 53 bits of precision.
  double unit();

  bool bernoulli(double p) { return unit() < p; }

  /// Exponential inter-arrival with the given mean, rounded to whole ns and
  /// clamped to at least 1 ns.
  SimTime exponential(SimTime mean);

  /// Derives an independent child stream keyed "<key>/<suffix>".
  RngStream fork(std::string_view suffix) const { return RngStream(seed_, key_ + "/" + std::string(suffix)); }

 private:
  std::uint64_t seed_;
  std::string key_;
  std::uint64_t base_;
  std::uint64_t counter_ = 0;
};

/// Free-function form of RngStream::uniform.
inline std::uint64_t rng_draw(RngStream& stream, std::uint64_t bound) { return stream.uniform(bound); }

}  // namespace rangesim
