#pragma once

#include <span>
#include <variant>
#include <vector>

#include "rangesim/net/topology.hpp"
#include "rangesim/proto/wire.hpp"

namespace rangesim {

struct RouteForward {
  std::size_t interface = 0;
  Ipv4Address next_hop;
  /// The packet bytes with TTL decremented and header checksum updated;
  /// everything else is byte-identical to the input.
  Bytes packet;
};

struct RouteDrop {
  enum class Reason : std::uint8_t { TtlExpired, NoRoute, Malformed } reason = Reason::NoRoute;
  /// ICMP error to send back toward the source, if one is due.
  std::optional<Ipv4Packet> icmp_error;
  std::size_t reply_interface = 0;
};

using RouteDecision = std::variant<RouteForward, RouteDrop>;

/// Forwards one IPv4 packet (bytes, without link-layer framing) arriving on
/// `ingress`. Destinations outside every connected subnet get ICMP
/// Destination Unreachable (net unreachable); TTL <= 1 gets ICMP Time
/// Exceeded. No ICMP errors are generated about ICMP errors.
RouteDecision route_packet(std::span<const Interface> interfaces, std::size_t ingress,
                           std::span<const std::uint8_t> packet, std::uint8_t router_ttl);

/// Builds an ICMP error quoting the original header plus 8 payload bytes.
Ipv4Packet make_icmp_error(Ipv4Address from, std::uint8_t ttl, std::uint8_t type, std::uint8_t code,
                           std::span<const std::uint8_t> original);

}  // namespace rangesim
