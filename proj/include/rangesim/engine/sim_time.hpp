#pragma once

// Virtual simulation clock. All timing in the simulator is integral
// nanoseconds so that capture timestamps reproduce bit-for-bit.

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace rangesim {

class SimTime {
 public:
  constexpr SimTime() = default;
  constexpr explicit SimTime(std::uint64_t ns) : ns_(ns) {}

  constexpr std::uint64_t ns() const { return ns_; }
  constexpr double seconds() const { return static_cast<double>(ns_) / 1e9; }

  constexpr auto operator<=>(const SimTime&) const = default;

  constexpr SimTime& operator+=(SimTime d) {
    ns_ += d.ns_;
    return *this;
  }
  friend constexpr SimTime operator+(SimTime a, SimTime b) { return SimTime(a.ns_ + b.ns_); }
  // Saturates at zero.
  friend constexpr SimTime operator-(SimTime a, SimTime b) {
    return SimTime(a.ns_ >= b.ns_ ? a.ns_ - b.ns_ : 0);
  }
  friend constexpr SimTime operator*(SimTime a, std::uint64_t k) { return SimTime(a.ns_ * k); }

  static constexpr SimTime max() { return SimTime(UINT64_MAX); }

 private:
  std::uint64_t ns_ = 0;
};

constexpr SimTime Nanoseconds(std::uint64_t v) { return SimTime(v); }
constexpr SimTime Microseconds(std::uint64_t v) { return SimTime(v * 1'000ULL); }
constexpr SimTime Milliseconds(std::uint64_t v) { return SimTime(v * 1'000'000ULL); }
constexpr SimTime Seconds(std::uint64_t v) { return SimTime(v * 1'000'000'000ULL); }
constexpr SimTime Minutes(std::uint64_t v) { return Seconds(v * 60); }

/// Parses "3600s", "30m", "1h", "200us", "10ms", "5ns" or a bare integer
/// (nanoseconds). Throws std::invalid_argument on malformed input.
SimTime parse_duration(std::string_view text);

/// Largest exact unit, e.g. "30m", "90s", "200us".
std::string format_duration(SimTime t);

}  // namespace rangesim
