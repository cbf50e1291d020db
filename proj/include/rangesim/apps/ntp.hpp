#pragma once

#include <array>
#include <cstdint>
#include <optional>

#include "rangesim/engine/sim_time.hpp"
#include "rangesim/proto/wire.hpp"

namespace rangesim::ntp {

inline constexpr std::size_t kPacketLen = 48;
inline constexpr std::uint16_t kPort = 123;
inline constexpr std::uint8_t kModeClient = 3;
inline constexpr std::uint8_t kModeServer = 4;

/// 32.32 fixed-point seconds of simulation time (no epoch offset).
std::uint64_t to_timestamp(SimTime t);
SimTime from_timestamp(std::uint64_t ts);

struct Packet {
  std::uint8_t leap = 0;
  std::uint8_t version = 4;
  std::uint8_t mode = kModeClient;
  std::uint8_t stratum = 0;
  std::uint8_t poll = 6;
  std::int8_t precision = -20;
  std::uint32_t root_delay = 0;
  std::uint32_t root_dispersion = 0;
  std::uint32_t reference_id = 0;
  std::uint64_t reference_ts = 0;
  std::uint64_t originate_ts = 0;
  std::uint64_t receive_ts = 0;
  std::uint64_t transmit_ts = 0;
  friend bool operator==(const Packet&, const Packet&) = default;
};

Bytes encode(const Packet& p);
std::optional<Packet> decode(std::span<const std::uint8_t> bytes);

Packet make_request(SimTime now);
/// Mode-4 reply; receive and transmit timestamps are both `now`.
Packet make_response(const Packet& request, SimTime now);

}  // namespace rangesim::ntp
