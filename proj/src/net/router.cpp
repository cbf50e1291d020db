#include "rangesim/net/router.hpp"

#include "rangesim/proto/checksum.hpp"

namespace rangesim {

namespace {

bool is_icmp_error(std::span<const std::uint8_t> p, std::size_t ihl) {
  if (p[9] != ipproto::kIcmp || p.size() < ihl + 1) return false;
  const std::uint8_t type = p[ihl];
  return type != icmp_type::kEchoRequest && type != icmp_type::kEchoReply;
}

}  // namespace

Ipv4Packet make_icmp_error(Ipv4Address from, std::uint8_t ttl, std::uint8_t type, std::uint8_t code,
                           std::span<const std::uint8_t> original) {
  const std::size_t ihl = static_cast<std::size_t>(original[0] & 0x0F) * 4;
  const std::size_t quote = std::min(original.size(), ihl + 8);
  Ipv4Packet out;
  out.ttl = ttl;
  out.src = from;
  out.dst = Ipv4Address((std::uint32_t{original[12]} << 24) | (std::uint32_t{original[13]} << 16) |
                        (std::uint32_t{original[14]} << 8) | original[15]);
  IcmpMessage m;
  m.type = type;
  m.code = code;
  m.payload.assign(original.begin(), original.begin() + static_cast<std::ptrdiff_t>(quote));
  out.payload = std::move(m);
  return out;
}

RouteDecision route_packet(std::span<const Interface> interfaces, std::size_t ingress,
                           std::span<const std::uint8_t> packet, std::uint8_t router_ttl) {
  RouteDrop malformed;
  malformed.reason = RouteDrop::Reason::Malformed;
  if (packet.size() < kIpv4HeaderLen || (packet[0] >> 4) != 4) return malformed;
  const std::size_t ihl = static_cast<std::size_t>(packet[0] & 0x0F) * 4;
  const std::size_t total = (std::size_t{packet[2]} << 8) | packet[3];
  if (ihl < kIpv4HeaderLen || total < ihl || total > packet.size()) return malformed;
  packet = packet.subspan(0, total);

  const Ipv4Address dst((std::uint32_t{packet[16]} << 24) | (std::uint32_t{packet[17]} << 16) |
                        (std::uint32_t{packet[18]} << 8) | packet[19]);
  const bool may_reply = !is_icmp_error(packet, ihl);

  if (packet[8] <= 1) {
    RouteDrop drop;
    drop.reason = RouteDrop::Reason::TtlExpired;
    drop.reply_interface = ingress;
    if (may_reply) {
      drop.icmp_error = make_icmp_error(interfaces[ingress].ip, router_ttl, icmp_type::kTimeExceeded, 0, packet);
    }
    return drop;
  }

  for (std::size_t i = 0; i < interfaces.size(); ++i) {
    if (!interfaces[i].subnet.contains(dst)) continue;
    RouteForward fwd;
    fwd.interface = i;
    fwd.next_hop = dst;
    fwd.packet.assign(packet.begin(), packet.end());
    fwd.packet[8] = static_cast<std::uint8_t>(packet[8] - 1);
    fwd.packet[10] = 0;
    fwd.packet[11] = 0;
    const std::uint16_t c = inet_checksum(std::span<const std::uint8_t>(fwd.packet).subspan(0, ihl));
    fwd.packet[10] = static_cast<std::uint8_t>(c >> 8);
    fwd.packet[11] = static_cast<std::uint8_t>(c);
    return fwd;
  }

  RouteDrop drop;
  drop.reason = RouteDrop::Reason::NoRoute;
  drop.reply_interface = ingress;
  if (may_reply) {
    drop.icmp_error = make_icmp_error(interfaces[ingress].ip, router_ttl, icmp_type::kDestUnreachable, 0, packet);
  }
  return drop;
}

}  // namespace rangesim
