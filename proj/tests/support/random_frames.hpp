#pragma once

#include "rangesim/engine/rng.hpp"
#include "rangesim/proto/tcp_connection.hpp"
#include "rangesim/proto/wire.hpp"

namespace rangesim::test {

inline Bytes random_bytes(RngStream& r, std::size_t n) {
  Bytes b(n);
  for (auto& x : b) x = static_cast<std::uint8_t>(r.uniform(256));
  return b;
}

inline MacAddress random_mac(RngStream& r) {
  MacAddress m;
  for (auto& o : m.octets) o = static_cast<std::uint8_t>(r.uniform(256));
  m.octets[0] &= 0xFE;
  return m;
}

inline Ipv4Address random_ip(RngStream& r) { return Ipv4Address(static_cast<std::uint32_t>(r.next_u64())); }

/// Random frame over every codec: ARP, TCP, UDP, ICMP, IGMP and raw IP.
inline EthernetFrame random_frame(RngStream& r) {
  EthernetFrame f;
  f.dst = random_mac(r);
  f.src = random_mac(r);
  const auto kind = r.uniform(6);
  if (kind == 0) {
    ArpMessage a;
    a.op = r.bernoulli(0.5) ? ArpOp::Request : ArpOp::Reply;
    a.sender_mac = random_mac(r);
    a.sender_ip = random_ip(r);
    a.target_mac = random_mac(r);
    a.target_ip = random_ip(r);
    f.payload = a;
    return f;
  }
  Ipv4Packet p;
  p.identification = static_cast<std::uint16_t>(r.uniform(65536));
  p.ttl = static_cast<std::uint8_t>(1 + r.uniform(255));
  p.flags_fragment = r.bernoulli(0.5) ? 0x4000 : 0;
  p.src = random_ip(r);
  p.dst = random_ip(r);
  const std::size_t len = r.uniform(200);
  switch (kind) {
    case 1: {
      TcpSegment t;
      t.src_port = static_cast<std::uint16_t>(r.uniform(65536));
      t.dst_port = static_cast<std::uint16_t>(r.uniform(65536));
      t.seq = static_cast<std::uint32_t>(r.next_u64());
      t.ack = static_cast<std::uint32_t>(r.next_u64());
      t.flags = static_cast<std::uint8_t>(r.uniform(64));
      t.window = static_cast<std::uint16_t>(r.uniform(65536));
      t.payload = random_bytes(r, len);
      p.payload = t;
      break;
    }
    case 2: {
      UdpDatagram u;
      u.src_port = static_cast<std::uint16_t>(r.uniform(65536));
      u.dst_port = static_cast<std::uint16_t>(r.uniform(65536));
      u.payload = random_bytes(r, len);
      p.payload = u;
      break;
    }
    case 3: {
      IcmpMessage m;
      m.type = r.bernoulli(0.5) ? icmp_type::kEchoRequest : icmp_type::kEchoReply;
      m.id = static_cast<std::uint16_t>(r.uniform(65536));
      m.seq = static_cast<std::uint16_t>(r.uniform(65536));
      m.payload = random_bytes(r, len);
      p.payload = m;
      break;
    }
    case 4: {
      IgmpMessage g;
      g.type = r.bernoulli(0.5) ? igmp_type::kV2MembershipReport : igmp_type::kMembershipQuery;
      g.max_resp_time = static_cast<std::uint8_t>(r.uniform(256));
      g.group = random_ip(r);
      p.payload = g;
      break;
    }
    default: {
      RawIpPayload raw;
      raw.protocol = 47;
      raw.bytes = random_bytes(r, len);
      p.payload = raw;
      break;
    }
  }
  f.payload = p;
  return f;
}

/// Random command or segment for a connection on port 1000 talking to 2000.
inline TcpInput random_tcp_input(RngStream& r, const TcpConnection& c, std::uint32_t peer_iss) {
  switch (r.uniform(9)) {
    case 0: return tcp_cmd::OpenActive{};
    case 1: return tcp_cmd::Listen{};
    case 2: return tcp_cmd::Send{Bytes(r.uniform(50), 7)};
    case 3: return tcp_cmd::Close{};
    case 4: return tcp_cmd::Abort{};
    case 5: return r.bernoulli(0.5) ? TcpInput{tcp_cmd::RetransmitTimeout{}} : TcpInput{tcp_cmd::TimeWaitTimeout{}};
    default: break;
  }
  TcpSegment s;
  s.src_port = 2000;
  s.dst_port = 1000;
  // Mostly plausible numbers so that deeper states are reached.
  s.seq = r.bernoulli(0.7) ? c.rcv_nxt() : static_cast<std::uint32_t>(r.next_u64());
  if (c.rcv_nxt() == 0 && r.bernoulli(0.5)) s.seq = peer_iss;
  s.ack = r.bernoulli(0.7) ? c.snd_nxt() : static_cast<std::uint32_t>(r.next_u64());
  s.flags = static_cast<std::uint8_t>(r.uniform(64));
  if (r.bernoulli(0.3)) s.payload = Bytes(r.uniform(20), 1);
  return s;
}

}  // namespace rangesim::test
