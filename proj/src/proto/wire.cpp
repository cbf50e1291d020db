#include "rangesim/proto/wire.hpp"

#include <sstream>

#include "rangesim/proto/checksum.hpp"

namespace rangesim {

namespace {

void put16(Bytes& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}
void put32(Bytes& out, std::uint32_t v) {
  put16(out, static_cast<std::uint16_t>(v >> 16));
  put16(out, static_cast<std::uint16_t>(v));
}
void put_mac(Bytes& out, const MacAddress& m) { out.insert(out.end(), m.octets.begin(), m.octets.end()); }
void set16(Bytes& out, std::size_t at, std::uint16_t v) {
  out[at] = static_cast<std::uint8_t>(v >> 8);
  out[at + 1] = static_cast<std::uint8_t>(v);
}

std::uint16_t get16(std::span<const std::uint8_t> b, std::size_t at) {
  return static_cast<std::uint16_t>((b[at] << 8) | b[at + 1]);
}
std::uint32_t get32(std::span<const std::uint8_t> b, std::size_t at) {
  return (std::uint32_t{get16(b, at)} << 16) | get16(b, at + 2);
}
MacAddress get_mac(std::span<const std::uint8_t> b, std::size_t at) {
  MacAddress m;
  for (int i = 0; i < 6; ++i) m.octets[i] = b[at + i];
  return m;
}

void require(std::span<const std::uint8_t> b, std::size_t n, const char* what) {
  if (b.size() < n) {
    throw DecodeError(DecodeErrorKind::TruncatedFrame,
                      std::string("truncated ") + what + ": need " + std::to_string(n) + " bytes, have " +
                          std::to_string(b.size()));
  }
}

std::uint16_t finish_checksum(std::uint64_t sum) { return static_cast<std::uint16_t>(~fold_sum(sum)); }

bool verifies(std::uint64_t sum) { return fold_sum(sum) == 0xFFFF; }

std::size_t l4_length(const Ipv4Packet& p) {
  return std::visit(
      [](const auto& m) -> std::size_t {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, TcpSegment>) return kTcpHeaderLen + m.payload.size();
        if constexpr (std::is_same_v<T, UdpDatagram>) return kUdpHeaderLen + m.payload.size();
        if constexpr (std::is_same_v<T, IcmpMessage>) return kIcmpHeaderLen + m.payload.size();
        if constexpr (std::is_same_v<T, IgmpMessage>) return kIgmpLen;
        if constexpr (std::is_same_v<T, RawIpPayload>) return m.bytes.size();
      },
      p.payload);
}

void encode_l4(const Ipv4Packet& p, Bytes& out) {
  const std::size_t start = out.size();
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, TcpSegment>) {
          put16(out, m.src_port);
          put16(out, m.dst_port);
          put32(out, m.seq);
          put32(out, m.ack);
          out.push_back(0x50);  // data offset 5, no options
          out.push_back(m.flags);
          put16(out, m.window);
          put16(out, 0);
          put16(out, m.urgent);
          out.insert(out.end(), m.payload.begin(), m.payload.end());
          const std::size_t len = out.size() - start;
          std::uint16_t c = m.checksum.value_or(0);
          if (!m.checksum) {
            const auto seg = std::span<const std::uint8_t>(out).subspan(start);
            c = finish_checksum(pseudo_header_sum(p.src, p.dst, ipproto::kTcp, len) + word_sum(seg));
          }
          set16(out, start + 16, c);
        } else if constexpr (std::is_same_v<T, UdpDatagram>) {
          put16(out, m.src_port);
          put16(out, m.dst_port);
          put16(out, static_cast<std::uint16_t>(kUdpHeaderLen + m.payload.size()));
          put16(out, 0);
          out.insert(out.end(), m.payload.begin(), m.payload.end());
          const std::size_t len = out.size() - start;
          std::uint16_t c = m.checksum.value_or(0);
          if (!m.checksum) {
            const auto seg = std::span<const std::uint8_t>(out).subspan(start);
            c = finish_checksum(pseudo_header_sum(p.src, p.dst, ipproto::kUdp, len) + word_sum(seg));
            if (c == 0) c = 0xFFFF;  // zero means "no checksum" for UDP
          }
          set16(out, start + 6, c);
        } else if constexpr (std::is_same_v<T, IcmpMessage>) {
          out.push_back(m.type);
          out.push_back(m.code);
          put16(out, 0);
          put16(out, m.id);
          put16(out, m.seq);
          out.insert(out.end(), m.payload.begin(), m.payload.end());
          std::uint16_t c = m.checksum.value_or(0);
          if (!m.checksum) c = inet_checksum(std::span<const std::uint8_t>(out).subspan(start));
          set16(out, start + 2, c);
        } else if constexpr (std::is_same_v<T, IgmpMessage>) {
          out.push_back(m.type);
          out.push_back(m.max_resp_time);
          put16(out, 0);
          put32(out, m.group.value);
          std::uint16_t c = m.checksum.value_or(0);
          if (!m.checksum) c = inet_checksum(std::span<const std::uint8_t>(out).subspan(start));
          set16(out, start + 2, c);
        } else {
          out.insert(out.end(), m.bytes.begin(), m.bytes.end());
        }
      },
      p.payload);
}

void encode_ipv4_into(const Ipv4Packet& p, Bytes& out) {
  const std::size_t start = out.size();
  const std::size_t total = p.total_length();
  if (total > 0xFFFF) throw std::length_error("IPv4 packet exceeds 65535 bytes");
  out.push_back(0x45);
  out.push_back(p.dscp_ecn);
  put16(out, static_cast<std::uint16_t>(total));
  put16(out, p.identification);
  put16(out, p.flags_fragment);
  out.push_back(p.ttl);
  out.push_back(p.protocol());
  put16(out, 0);
  put32(out, p.src.value);
  put32(out, p.dst.value);
  std::uint16_t c = p.header_checksum.value_or(0);
  if (!p.header_checksum) c = inet_checksum(std::span<const std::uint8_t>(out).subspan(start, kIpv4HeaderLen));
  set16(out, start + 10, c);
  encode_l4(p, out);
}

}  // namespace

std::uint8_t Ipv4Packet::protocol() const {
  return std::visit(
      [](const auto& m) -> std::uint8_t {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, TcpSegment>) return ipproto::kTcp;
        if constexpr (std::is_same_v<T, UdpDatagram>) return ipproto::kUdp;
        if constexpr (std::is_same_v<T, IcmpMessage>) return ipproto::kIcmp;
        if constexpr (std::is_same_v<T, IgmpMessage>) return ipproto::kIgmp;
        if constexpr (std::is_same_v<T, RawIpPayload>) return m.protocol;
      },
      payload);
}

std::size_t Ipv4Packet::total_length() const { return kIpv4HeaderLen + l4_length(*this); }

std::uint16_t EthernetFrame::ethertype() const {
  if (std::holds_alternative<Ipv4Packet>(payload)) return ethertype::kIpv4;
  if (std::holds_alternative<ArpMessage>(payload)) return ethertype::kArp;
  return std::get<RawPayload>(payload).ethertype;
}

std::uint64_t pseudo_header_sum(Ipv4Address src, Ipv4Address dst, std::uint8_t protocol, std::size_t length) {
  return (src.value >> 16) + (src.value & 0xFFFF) + (dst.value >> 16) + (dst.value & 0xFFFF) + protocol + length;
}

Bytes encode_ipv4(const Ipv4Packet& packet) {
  Bytes out;
  out.reserve(packet.total_length());
  encode_ipv4_into(packet, out);
  return out;
}

Bytes encode_frame(const EthernetFrame& frame) {
  Bytes out;
  out.reserve(kEthernetMinFrame + 1500);
  put_mac(out, frame.dst);
  put_mac(out, frame.src);
  put16(out, frame.ethertype());
  if (const auto* arp = frame.arp()) {
    put16(out, 1);  // Ethernet
    put16(out, ethertype::kIpv4);
    out.push_back(6);
    out.push_back(4);
    put16(out, static_cast<std::uint16_t>(arp->op));
    put_mac(out, arp->sender_mac);
    put32(out, arp->sender_ip.value);
    put_mac(out, arp->target_mac);
    put32(out, arp->target_ip.value);
  } else if (const auto* ip = frame.ipv4()) {
    encode_ipv4_into(*ip, out);
  } else {
    const auto& raw = std::get<RawPayload>(frame.payload);
    out.insert(out.end(), raw.bytes.begin(), raw.bytes.end());
  }
  if (out.size() < kEthernetMinFrame) out.resize(kEthernetMinFrame, 0);
  return out;
}

Ipv4Packet decode_ipv4(std::span<const std::uint8_t> b, ChecksumStatus* status) {
  require(b, kIpv4HeaderLen, "IPv4 header");
  if ((b[0] >> 4) != 4) throw DecodeError(DecodeErrorKind::MalformedHeader, "IPv4 version field is not 4");
  const std::size_t ihl = static_cast<std::size_t>(b[0] & 0x0F) * 4;
  if (ihl < kIpv4HeaderLen) throw DecodeError(DecodeErrorKind::MalformedHeader, "IPv4 IHL < 5");
  const std::size_t total = get16(b, 2);
  if (total < ihl) throw DecodeError(DecodeErrorKind::MalformedHeader, "IPv4 total length < header length");
  require(b, total, "IPv4 packet");

  ChecksumStatus st;
  Ipv4Packet p;
  p.dscp_ecn = b[1];
  p.identification = get16(b, 4);
  p.flags_fragment = get16(b, 6);
  p.ttl = b[8];
  const std::uint8_t proto = b[9];
  p.header_checksum = get16(b, 10);
  p.src = Ipv4Address(get32(b, 12));
  p.dst = Ipv4Address(get32(b, 16));
  st.ip_header_ok = verifies(word_sum(b.subspan(0, ihl)));

  const auto l4 = b.subspan(ihl, total - ihl);
  switch (proto) {
    case ipproto::kTcp: {
      require(l4, kTcpHeaderLen, "TCP header");
      const std::size_t off = static_cast<std::size_t>(l4[12] >> 4) * 4;
      if (off < kTcpHeaderLen || off > l4.size()) {
        throw DecodeError(DecodeErrorKind::MalformedHeader, "TCP data offset out of range");
      }
      TcpSegment s;
      s.src_port = get16(l4, 0);
      s.dst_port = get16(l4, 2);
      s.seq = get32(l4, 4);
      s.ack = get32(l4, 8);
      s.flags = l4[13];
      s.window = get16(l4, 14);
      s.checksum = get16(l4, 16);
      s.urgent = get16(l4, 18);
      s.payload.assign(l4.begin() + static_cast<std::ptrdiff_t>(off), l4.end());
      st.l4_ok = verifies(pseudo_header_sum(p.src, p.dst, proto, l4.size()) + word_sum(l4));
      p.payload = std::move(s);
      break;
    }
    case ipproto::kUdp: {
      require(l4, kUdpHeaderLen, "UDP header");
      const std::size_t len = get16(l4, 4);
      if (len < kUdpHeaderLen || len > l4.size()) {
        throw DecodeError(DecodeErrorKind::MalformedHeader, "UDP length field out of range");
      }
      UdpDatagram d;
      d.src_port = get16(l4, 0);
      d.dst_port = get16(l4, 2);
      d.checksum = get16(l4, 6);
      d.payload.assign(l4.begin() + kUdpHeaderLen, l4.begin() + static_cast<std::ptrdiff_t>(len));
      st.l4_ok = *d.checksum == 0 ||
                 verifies(pseudo_header_sum(p.src, p.dst, proto, len) + word_sum(l4.subspan(0, len)));
      p.payload = std::move(d);
      break;
    }
    case ipproto::kIcmp: {
      require(l4, kIcmpHeaderLen, "ICMP header");
      IcmpMessage m;
      m.type = l4[0];
      m.code = l4[1];
      m.checksum = get16(l4, 2);
      m.id = get16(l4, 4);
      m.seq = get16(l4, 6);
      m.payload.assign(l4.begin() + kIcmpHeaderLen, l4.end());
      st.l4_ok = verifies(word_sum(l4));
      p.payload = std::move(m);
      break;
    }
    case ipproto::kIgmp: {
      require(l4, kIgmpLen, "IGMP message");
      IgmpMessage m;
      m.type = l4[0];
      m.max_resp_time = l4[1];
      m.checksum = get16(l4, 2);
      m.group = Ipv4Address(get32(l4, 4));
      st.l4_ok = verifies(word_sum(l4.subspan(0, kIgmpLen)));
      if (l4.size() != kIgmpLen) {
        // IGMPv3 and friends: keep bytes verbatim.
        p.payload = RawIpPayload{proto, Bytes(l4.begin(), l4.end())};
        st.l4_ok = verifies(word_sum(l4));
      } else {
        p.payload = m;
      }
      break;
    }
    default:
      p.payload = RawIpPayload{proto, Bytes(l4.begin(), l4.end())};
      break;
  }
  if (status) *status = st;
  return p;
}

DecodedFrame decode_frame(std::span<const std::uint8_t> b) {
  require(b, kEthernetHeaderLen, "Ethernet header");
  DecodedFrame out;
  out.frame.dst = get_mac(b, 0);
  out.frame.src = get_mac(b, 6);
  const std::uint16_t type = get16(b, 12);
  const auto body = b.subspan(kEthernetHeaderLen);
  if (type == ethertype::kArp) {
    require(body, kArpBodyLen, "ARP body");
    if (get16(body, 0) != 1 || get16(body, 2) != ethertype::kIpv4 || body[4] != 6 || body[5] != 4) {
      throw DecodeError(DecodeErrorKind::MalformedHeader, "ARP is not Ethernet/IPv4");
    }
    ArpMessage a;
    a.op = static_cast<ArpOp>(get16(body, 6));
    a.sender_mac = get_mac(body, 8);
    a.sender_ip = Ipv4Address(get32(body, 14));
    a.target_mac = get_mac(body, 18);
    a.target_ip = Ipv4Address(get32(body, 24));
    out.frame.payload = a;
  } else if (type == ethertype::kIpv4) {
    out.frame.payload = decode_ipv4(body, &out.checksums);
  } else {
    out.frame.payload = RawPayload{type, Bytes(body.begin(), body.end())};
    out.unknown_ethertype = true;
  }
  return out;
}

EthernetFrame with_checksums(const EthernetFrame& frame) { return decode_frame(encode_frame(frame)).frame; }

std::string describe(const EthernetFrame& f) {
  std::ostringstream os;
  os << f.src.to_string() << " > " << f.dst.to_string();
  if (const auto* a = f.arp()) {
    os << " ARP " << (a->op == ArpOp::Request ? "who-has " : "is-at ") << a->target_ip.to_string()
       << " tell " << a->sender_ip.to_string() << " (" << a->sender_mac.to_string() << ")";
  } else if (const auto* ip = f.ipv4()) {
    os << " IP " << ip->src.to_string() << " > " << ip->dst.to_string() << " ttl " << int(ip->ttl);
    if (const auto* t = ip->tcp()) {
      os << " TCP " << t->src_port << ">" << t->dst_port << " [";
      if (t->flags & tcp_flag::kSyn) os << 'S';
      if (t->flags & tcp_flag::kFin) os << 'F';
      if (t->flags & tcp_flag::kRst) os << 'R';
      if (t->flags & tcp_flag::kPsh) os << 'P';
      if (t->flags & tcp_flag::kAck) os << '.';
      os << "] seq " << t->seq << " ack " << t->ack << " len " << t->payload.size();
    } else if (const auto* u = ip->udp()) {
      os << " UDP " << u->src_port << ">" << u->dst_port << " len " << u->payload.size();
    } else if (const auto* i = ip->icmp()) {
      os << " ICMP type " << int(i->type) << " code " << int(i->code) << " id " << i->id << " seq " << i->seq;
    } else if (const auto* g = ip->igmp()) {
      os << " IGMP type 0x" << std::hex << int(g->type) << std::dec << " group " << g->group.to_string();
    } else {
      os << " proto " << int(ip->protocol());
    }
  } else {
    os << " ethertype 0x" << std::hex << f.ethertype();
  }
  return os.str();
}

}  // namespace rangesim
