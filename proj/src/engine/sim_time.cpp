#include "rangesim/engine/sim_time.hpp"

#include <array>
#include <charconv>
#include <stdexcept>
#include <utility>

namespace rangesim {

namespace {

struct Unit {
  std::string_view suffix;
  std::uint64_t ns;
};

// Longest suffixes first so "ms" is not read as "m".
constexpr std::array<Unit, 7> kUnits{{{"ns", 1ULL},
                                      {"us", 1'000ULL},
                                      {"ms", 1'000'000ULL},
                                      {"s", 1'000'000'000ULL},
                                      {"m", 60'000'000'000ULL},
                                      {"h", 3'600'000'000'000ULL},
                                      {"d", 86'400'000'000'000ULL}}};

}  // namespace

SimTime parse_duration(std::string_view text) {
  if (text.empty()) throw std::invalid_argument("empty duration");
  std::size_t digits = 0;
  while (digits < text.size() && text[digits] >= '0' && text[digits] <= '9') ++digits;
  if (digits == 0) throw std::invalid_argument("duration must start with digits: '" + std::string(text) + "'");

  std::uint64_t value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + digits, value);
  if (ec != std::errc{}) throw std::invalid_argument("duration out of range: '" + std::string(text) + "'");

  const std::string_view suffix = text.substr(digits);
  if (suffix.empty()) return SimTime(value);
  for (const auto& unit : kUnits) {
    if (suffix == unit.suffix) {
      if (value > UINT64_MAX / unit.ns) throw std::invalid_argument("duration overflows: '" + std::string(text) + "'");
      return SimTime(value * unit.ns);
    }
  }
  throw std::invalid_argument("unknown duration unit '" + std::string(suffix) + "'");
}

std::string format_duration(SimTime t) {
  const std::uint64_t ns = t.ns();
  if (ns == 0) return "0s";
  for (auto it = kUnits.rbegin(); it != kUnits.rend(); ++it) {
    if (ns % it->ns == 0) return std::to_string(ns / it->ns) + std::string(it->suffix);
  }
  return std::to_string(ns) + "ns";
}

}  // namespace rangesim
