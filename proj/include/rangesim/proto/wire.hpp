#pragma once

// Byte-exact codecs for Ethernet II, ARP, IPv4 (no options), ICMP, IGMPv2,
// TCP (fixed 20-byte header) and UDP.
//
// Checksum fields are std::optional: an empty field is computed on encode,
// a filled one is written verbatim (malformed attack traffic keeps its bytes).
// decode_frame always fills them with what was on the wire and reports
// whether each one verifies.

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "rangesim/proto/addresses.hpp"

namespace rangesim {

using Bytes = std::vector<std::uint8_t>;

inline constexpr std::size_t kEthernetHeaderLen = 14;
inline constexpr std::size_t kEthernetMinFrame = 60;  // without FCS
inline constexpr std::size_t kArpBodyLen = 28;
inline constexpr std::size_t kIpv4HeaderLen = 20;
inline constexpr std::size_t kTcpHeaderLen = 20;
inline constexpr std::size_t kUdpHeaderLen = 8;
inline constexpr std::size_t kIcmpHeaderLen = 8;
inline constexpr std::size_t kIgmpLen = 8;
inline constexpr std::uint16_t kTcpWindow = 65535;
inline constexpr std::size_t kTcpMss = 1460;

namespace ethertype {
inline constexpr std::uint16_t kIpv4 = 0x0800;
inline constexpr std::uint16_t kArp = 0x0806;
}  // namespace ethertype

namespace ipproto {
inline constexpr std::uint8_t kIcmp = 1;
inline constexpr std::uint8_t kIgmp = 2;
inline constexpr std::uint8_t kTcp = 6;
inline constexpr std::uint8_t kUdp = 17;
}  // namespace ipproto

namespace icmp_type {
inline constexpr std::uint8_t kEchoReply = 0;
inline constexpr std::uint8_t kDestUnreachable = 3;
inline constexpr std::uint8_t kEchoRequest = 8;
inline constexpr std::uint8_t kTimeExceeded = 11;
}  // namespace icmp_type

namespace igmp_type {
inline constexpr std::uint8_t kMembershipQuery = 0x11;
inline constexpr std::uint8_t kV2MembershipReport = 0x16;
}  // namespace igmp_type

namespace tcp_flag {
inline constexpr std::uint8_t kFin = 0x01;
inline constexpr std::uint8_t kSyn = 0x02;
inline constexpr std::uint8_t kRst = 0x04;
inline constexpr std::uint8_t kPsh = 0x08;
inline constexpr std::uint8_t kAck = 0x10;
inline constexpr std::uint8_t kUrg = 0x20;
}  // namespace tcp_flag

enum class ArpOp : std::uint16_t { Request = 1, Reply = 2 };

struct ArpMessage {
  ArpOp op = ArpOp::Request;
  MacAddress sender_mac;
  Ipv4Address sender_ip;
  MacAddress target_mac;
  Ipv4Address target_ip;
  friend bool operator==(const ArpMessage&, const ArpMessage&) = default;
};

/// Echo messages use id/seq. Errors (3, 11) carry the zero "unused" word in
/// id/seq and the quoted original header + 8 bytes in payload.
struct IcmpMessage {
  std::uint8_t type = icmp_type::kEchoRequest;
  std::uint8_t code = 0;
  std::optional<std::uint16_t> checksum;
  std::uint16_t id = 0;
  std::uint16_t seq = 0;
  Bytes payload;
  friend bool operator==(const IcmpMessage&, const IcmpMessage&) = default;
};

struct IgmpMessage {
  std::uint8_t type = igmp_type::kV2MembershipReport;
  std::uint8_t max_resp_time = 0;
  std::optional<std::uint16_t> checksum;
  Ipv4Address group;
  friend bool operator==(const IgmpMessage&, const IgmpMessage&) = default;
};

struct TcpSegment {
  std::uint16_t src_port = 0;
  std::uint16_t dst_port = 0;
  std::uint32_t seq = 0;
  std::uint32_t ack = 0;
  std::uint8_t flags = 0;
  std::uint16_t window = kTcpWindow;
  std::optional<std::uint16_t> checksum;
  std::uint16_t urgent = 0;
  Bytes payload;

  bool has(std::uint8_t f) const { return (flags & f) == f; }
  /// Sequence space consumed: payload plus one for each of SYN and FIN.
  std::uint32_t seq_len() const {
    return static_cast<std::uint32_t>(payload.size()) + ((flags & tcp_flag::kSyn) ? 1 : 0) +
           ((flags & tcp_flag::kFin) ? 1 : 0);
  }
  friend bool operator==(const TcpSegment&, const TcpSegment&) = default;
};

struct UdpDatagram {
  std::uint16_t src_port = 0;
  std::uint16_t dst_port = 0;
  std::optional<std::uint16_t> checksum;
  Bytes payload;
  friend bool operator==(const UdpDatagram&, const UdpDatagram&) = default;
};

/// IP payload for protocol numbers without a codec.
struct RawIpPayload {
  std::uint8_t protocol = 0;
  Bytes bytes;
  friend bool operator==(const RawIpPayload&, const RawIpPayload&) = default;
};

struct Ipv4Packet {
  std::uint8_t dscp_ecn = 0;
  std::uint16_t identification = 0;
  std::uint16_t flags_fragment = 0x4000;  // DF
  std::uint8_t ttl = 64;
  std::optional<std::uint16_t> header_checksum;
  Ipv4Address src;
  Ipv4Address dst;
  std::variant<TcpSegment, UdpDatagram, IcmpMessage, IgmpMessage, RawIpPayload> payload;

  std::uint8_t protocol() const;
  std::size_t total_length() const;

  const TcpSegment* tcp() const { return std::get_if<TcpSegment>(&payload); }
  const UdpDatagram* udp() const { return std::get_if<UdpDatagram>(&payload); }
  const IcmpMessage* icmp() const { return std::get_if<IcmpMessage>(&payload); }
  const IgmpMessage* igmp() const { return std::get_if<IgmpMessage>(&payload); }
  TcpSegment* tcp() { return std::get_if<TcpSegment>(&payload); }

  friend bool operator==(const Ipv4Packet&, const Ipv4Packet&) = default;
};

/// Ethernet payload with an ethertype we do not decode.
struct RawPayload {
  std::uint16_t ethertype = 0;
  Bytes bytes;
  friend bool operator==(const RawPayload&, const RawPayload&) = default;
};

struct EthernetFrame {
  MacAddress dst;
  MacAddress src;
  std::variant<Ipv4Packet, ArpMessage, RawPayload> payload;

  std::uint16_t ethertype() const;
  const Ipv4Packet* ipv4() const { return std::get_if<Ipv4Packet>(&payload); }
  const ArpMessage* arp() const { return std::get_if<ArpMessage>(&payload); }
  Ipv4Packet* ipv4() { return std::get_if<Ipv4Packet>(&payload); }

  friend bool operator==(const EthernetFrame&, const EthernetFrame&) = default;
};

enum class DecodeErrorKind { TruncatedFrame, MalformedHeader };

class DecodeError : public std::runtime_error {
 public:
  DecodeError(DecodeErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  DecodeErrorKind kind() const { return kind_; }

 private:
  DecodeErrorKind kind_;
};

struct ChecksumStatus {
  bool ip_header_ok = true;
  bool l4_ok = true;
  bool all_ok() const { return ip_header_ok && l4_ok; }
};

struct DecodedFrame {
  EthernetFrame frame;
  ChecksumStatus checksums;
  bool unknown_ethertype = false;
};

Bytes encode_ipv4(const Ipv4Packet& packet);
Bytes encode_frame(const EthernetFrame& frame);

/// Throws DecodeError on truncation. Bad checksums and unknown ethertypes are
/// reported in the result, not thrown.
DecodedFrame decode_frame(std::span<const std::uint8_t> bytes);
Ipv4Packet decode_ipv4(std::span<const std::uint8_t> bytes, ChecksumStatus* status = nullptr);

/// Returns the frame as it decodes after encoding, i.e. with every empty
/// checksum computed.
EthernetFrame with_checksums(const EthernetFrame& frame);

/// Ones'-complement sum of the IPv4 pseudo-header (unfolded).
std::uint64_t pseudo_header_sum(Ipv4Address src, Ipv4Address dst, std::uint8_t protocol, std::size_t length);

std::string describe(const EthernetFrame& frame);

}  // namespace rangesim
