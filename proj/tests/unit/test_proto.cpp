#include <doctest.h>

#include <fstream>
#include <set>
#include <string>

#include "rangesim/engine/rng.hpp"
#include "rangesim/proto/checksum.hpp"
#include "rangesim/proto/tcp_connection.hpp"
#include "rangesim/proto/wire.hpp"
#include "support/random_frames.hpp"

using namespace rangesim;
using rangesim::test::random_bytes;
using rangesim::test::random_frame;

namespace {

Bytes load_hex_fixture(const std::string& name) {
  std::ifstream in(std::string(RANGESIM_FIXTURES) + "/" + name);
  REQUIRE(in.good());
  std::string hex;
  in >> hex;
  Bytes out;
  for (std::size_t i = 0; i + 1 < hex.size(); i += 2) {
    out.push_back(static_cast<std::uint8_t>(std::stoul(hex.substr(i, 2), nullptr, 16)));
  }
  return out;
}

// Independent oracle: plain 32-bit accumulation of big-endian words.
std::uint16_t reference_checksum(const Bytes& data) {
  std::uint32_t sum = 0;
  for (std::size_t i = 0; i < data.size(); i += 2) {
    std::uint32_t word = static_cast<std::uint32_t>(data[i]) << 8;
    if (i + 1 < data.size()) word |= data[i + 1];
    sum += word;
    sum = (sum & 0xFFFF) + (sum >> 16);
  }
  return static_cast<std::uint16_t>(~sum & 0xFFFF);
}

}  // namespace

TEST_CASE("checksum of zeros is 0xFFFF") {
  CHECK(inet_checksum(Bytes(64, 0)) == 0xFFFF);
  CHECK(inet_checksum(Bytes{}) == 0xFFFF);
}

TEST_CASE("checksum of a fixed 8-byte input matches the independent oracle") {
  const Bytes input = {0x45, 0x00, 0x00, 0x1c, 0xfe, 0xdc, 0xba, 0x98};
  CHECK(reference_checksum(input) == 0x016e);
  CHECK(inet_checksum(input) == 0x016e);
}

TEST_CASE("a buffer carrying its own checksum folds to 0xFFFF") {
  RngStream r(1, "selfverify");
  for (int i = 0; i < 200; ++i) {
    Bytes b = random_bytes(r, 2 * (1 + r.uniform(100)));
    b[0] = b[1] = 0;
    const std::uint16_t c = inet_checksum(b);
    b[0] = static_cast<std::uint8_t>(c >> 8);
    b[1] = static_cast<std::uint8_t>(c);
    CHECK(fold_sum(word_sum(b)) == 0xFFFF);
  }
}

TEST_CASE("every checksum kernel agrees with the oracle") {
  const std::string original(checksum_kernels::active_kernel());
  RngStream r(2, "kernels");
  std::vector<Bytes> inputs;
  for (std::size_t n = 0; n < 300; ++n) inputs.push_back(random_bytes(r, n));
  for (int i = 0; i < 50; ++i) inputs.push_back(random_bytes(r, r.uniform(9000)));
  inputs.push_back(Bytes(4096, 0xFF));
  inputs.push_back(Bytes(65535, 0xFF));
  int tested = 0;
  for (const char* name : {"scalar", "sse2", "avx2", "neon"}) {
    if (!checksum_kernels::select_kernel(name)) continue;
    ++tested;
    for (const auto& in : inputs) {
      CHECK(inet_checksum(in) == reference_checksum(in));
    }
  }
  CHECK(tested >= 1);
  CHECK_FALSE(checksum_kernels::select_kernel("bogus"));
  REQUIRE(checksum_kernels::select_kernel(original));
}

TEST_CASE("reference SYN frame encodes to the golden bytes") {
  EthernetFrame f;
  f.dst = MacAddress::parse("02:00:00:00:00:14");
  f.src = MacAddress::parse("02:00:00:00:01:0a");
  Ipv4Packet p;
  p.identification = 0x1234;
  p.flags_fragment = 0x4000;
  p.ttl = 64;
  p.src = Ipv4Address::parse("192.168.132.10");
  p.dst = Ipv4Address::parse("192.168.128.20");
  TcpSegment t;
  t.src_port = 49152;
  t.dst_port = 80;
  t.seq = 0x01020304;
  t.flags = tcp_flag::kSyn;
  t.window = 65535;
  p.payload = t;
  f.payload = p;

  const Bytes golden = load_hex_fixture("syn_frame.hex");
  REQUIRE(golden.size() == 60);
  CHECK(encode_frame(f) == golden);

  const DecodedFrame d = decode_frame(golden);
  CHECK(d.checksums.all_ok());
  CHECK(d.frame == with_checksums(f));
}

TEST_CASE("minimal ARP who-has is 42 bytes padded to 60") {
  EthernetFrame f;
  f.dst = MacAddress::broadcast();
  f.src = MacAddress::parse("02:00:00:00:01:0a");
  ArpMessage a;
  a.op = ArpOp::Request;
  a.sender_mac = f.src;
  a.sender_ip = Ipv4Address::parse("192.168.132.10");
  a.target_mac = MacAddress::zero();
  a.target_ip = Ipv4Address::parse("192.168.132.1");
  f.payload = a;
  const Bytes bytes = encode_frame(f);
  CHECK(bytes.size() == 60);
  CHECK(std::all_of(bytes.begin() + 42, bytes.end(), [](std::uint8_t b) { return b == 0; }));
  CHECK(bytes == load_hex_fixture("arp_who_has.hex"));
  CHECK(decode_frame(bytes).frame == f);
}

TEST_CASE("decode rejects truncation and keeps unknown ethertypes") {
  CHECK_THROWS_AS(decode_frame(Bytes(13, 0)), DecodeError);
  Bytes ipv6(60, 0);
  ipv6[12] = 0x86;
  ipv6[13] = 0xDD;
  const DecodedFrame d = decode_frame(ipv6);
  CHECK(d.unknown_ethertype);
  REQUIRE(std::holds_alternative<RawPayload>(d.frame.payload));
  CHECK(std::get<RawPayload>(d.frame.payload).ethertype == 0x86DD);

  const Bytes syn = load_hex_fixture("syn_frame.hex");
  CHECK_THROWS_AS(decode_frame(std::span(syn).first(30)), DecodeError);
}

TEST_CASE("bad checksums are flagged, not fatal") {
  Bytes syn = load_hex_fixture("syn_frame.hex");
  syn[24] ^= 0xFF;  // IP header checksum
  auto d = decode_frame(syn);
  CHECK_FALSE(d.checksums.ip_header_ok);
  CHECK(d.checksums.l4_ok);

  syn = load_hex_fixture("syn_frame.hex");
  syn[50] ^= 0x01;  // TCP checksum
  d = decode_frame(syn);
  CHECK(d.checksums.ip_header_ok);
  CHECK_FALSE(d.checksums.l4_ok);
}

TEST_CASE("explicit checksums are written verbatim") {
  EthernetFrame f;
  Ipv4Packet p;
  p.header_checksum = 0xBEEF;
  UdpDatagram u;
  u.checksum = 0x1234;
  p.payload = u;
  f.payload = p;
  const Bytes b = encode_frame(f);
  CHECK(b[24] == 0xBE);
  CHECK(b[25] == 0xEF);
  CHECK(b[40] == 0x12);
  CHECK(b[41] == 0x34);
}

TEST_CASE("decode of encode is identity on random frames") {
  RngStream r(3, "roundtrip");
  std::set<std::size_t> kinds;
  for (int i = 0; i < 10000; ++i) {
    const EthernetFrame f = random_frame(r);
    const Bytes bytes = encode_frame(f);
    REQUIRE(bytes.size() >= kEthernetMinFrame);
    const DecodedFrame d = decode_frame(bytes);
    CHECK(d.checksums.all_ok());
    const EthernetFrame expected = with_checksums(f);
    if (!(d.frame == expected)) FAIL("roundtrip mismatch: " << describe(f));
    CHECK(encode_frame(d.frame) == bytes);
    if (const auto* ip = f.ipv4()) kinds.insert(1 + ip->payload.index());
    else kinds.insert(0);
  }
  CHECK(kinds.size() == 6);
}

TEST_CASE("ipv4 total length and protocol") {
  Ipv4Packet p;
  TcpSegment t;
  t.payload = Bytes(100, 1);
  p.payload = t;
  CHECK(p.protocol() == ipproto::kTcp);
  CHECK(p.total_length() == 140);
  p.payload = IgmpMessage{};
  CHECK(p.protocol() == ipproto::kIgmp);
  CHECK(p.total_length() == 28);
}

TEST_CASE("active open sends SYN and completes on SYN-ACK") {
  TcpConnection c(49152, 80, 1000);
  auto r = c.step(tcp_cmd::OpenActive{});
  CHECK(c.state() == TcpState::SynSent);
  REQUIRE(r.emitted.size() == 1);
  CHECK(r.emitted[0].flags == tcp_flag::kSyn);
  CHECK(r.emitted[0].seq == 1000);

  TcpSegment synack;
  synack.src_port = 80;
  synack.dst_port = 49152;
  synack.seq = 5000;
  synack.ack = 1001;
  synack.flags = tcp_flag::kSyn | tcp_flag::kAck;
  r = c.step(synack);
  CHECK(c.state() == TcpState::Established);
  REQUIRE(r.emitted.size() == 1);
  CHECK(r.emitted[0].flags == tcp_flag::kAck);
  CHECK(r.emitted[0].ack == 5001);
  CHECK(r.notices == std::vector<TcpNotice>{TcpNotice::Connected});
}

namespace {

// Drives two connections against each other until both are quiet.
struct Pair {
  TcpConnection client{40000, 22, 111};
  TcpConnection server{22, 40000, 999};

  void pump(std::vector<TcpSegment> to_server, std::vector<TcpSegment> to_client = {}) {
    while (!to_server.empty() || !to_client.empty()) {
      std::vector<TcpSegment> next_server, next_client;
      for (const auto& s : to_server) {
        auto r = server.step(s);
        next_client.insert(next_client.end(), r.emitted.begin(), r.emitted.end());
      }
      for (const auto& s : to_client) {
        auto r = client.step(s);
        next_server.insert(next_server.end(), r.emitted.begin(), r.emitted.end());
      }
      to_server = std::move(next_server);
      to_client = std::move(next_client);
    }
  }

  void establish() {
    server.step(tcp_cmd::Listen{});
    pump(client.step(tcp_cmd::OpenActive{}).emitted);
  }
};

}  // namespace

TEST_CASE("handshake and four-way close") {
  Pair p;
  p.establish();
  CHECK(p.client.state() == TcpState::Established);
  CHECK(p.server.state() == TcpState::Established);

  p.pump(p.client.step(tcp_cmd::Send{Bytes{'h', 'i'}}).emitted);
  CHECK(p.server.rcv_nxt() == p.client.snd_nxt());

  auto r = p.client.step(tcp_cmd::Close{});
  CHECK(p.client.state() == TcpState::FinWait1);
  p.pump(r.emitted);
  CHECK(p.client.state() == TcpState::FinWait2);
  CHECK(p.server.state() == TcpState::CloseWait);
  r = p.server.step(tcp_cmd::Close{});
  CHECK(p.server.state() == TcpState::LastAck);
  p.pump({}, r.emitted);
  CHECK(p.client.state() == TcpState::TimeWait);
  CHECK(p.server.state() == TcpState::Closed);
  p.client.step(tcp_cmd::TimeWaitTimeout{});
  CHECK(p.client.state() == TcpState::Closed);
}

TEST_CASE("in-window RST closes without reply") {
  Pair p;
  p.establish();
  TcpSegment rst;
  rst.src_port = 22;
  rst.dst_port = 40000;
  rst.seq = p.client.rcv_nxt();
  rst.flags = tcp_flag::kRst;
  const auto r = p.client.step(rst);
  CHECK(p.client.state() == TcpState::Closed);
  CHECK(r.emitted.empty());
  CHECK(r.notices == std::vector<TcpNotice>{TcpNotice::Reset});
}

TEST_CASE("out-of-window RST is ignored") {
  Pair p;
  p.establish();
  TcpSegment rst;
  rst.seq = p.client.rcv_nxt() + 100000;
  rst.flags = tcp_flag::kRst;
  p.client.step(rst);
  CHECK(p.client.state() == TcpState::Established);
}

TEST_CASE("segments for an absent connection draw a RST") {
  TcpSegment syn;
  syn.src_port = 1234;
  syn.dst_port = 23;
  syn.seq = 77;
  syn.flags = tcp_flag::kSyn;
  const auto rst = TcpConnection::reset_for(syn);
  REQUIRE(rst);
  CHECK(rst->has(tcp_flag::kRst | tcp_flag::kAck));
  CHECK(rst->ack == 78);
  CHECK(rst->src_port == 23);

  TcpSegment incoming_rst;
  incoming_rst.flags = tcp_flag::kRst;
  CHECK_FALSE(TcpConnection::reset_for(incoming_rst));
}

TEST_CASE("handshake gives up after the retry budget") {
  TcpConnection c(1, 2, 3);
  c.step(tcp_cmd::OpenActive{});
  TcpStepResult r;
  for (int i = 0; i <= TcpConnection::kHandshakeRetries; ++i) r = c.step(tcp_cmd::RetransmitTimeout{});
  CHECK(c.state() == TcpState::Closed);
  CHECK(r.notices == std::vector<TcpNotice>{TcpNotice::TimedOut});
}

TEST_CASE("random input sequences always land in a named state") {
  RngStream r(4, "tcpfuzz");
  std::set<TcpState> seen;
  for (int run = 0; run < 10000; ++run) {
    TcpConnection c(1000, 2000, static_cast<std::uint32_t>(r.next_u64()));
    const std::uint32_t peer_iss = static_cast<std::uint32_t>(r.next_u64());
    const int steps = 1 + static_cast<int>(r.uniform(12));
    for (int i = 0; i < steps; ++i) {
      const TcpInput in = test::random_tcp_input(r, c, peer_iss);
      TcpStepResult res;
      CHECK_NOTHROW(res = c.step(in));
      const int s = static_cast<int>(c.state());
      REQUIRE(s >= 0);
      REQUIRE(s < kTcpStateCount);
      REQUIRE(std::string(to_string(c.state())) != "?");
      seen.insert(c.state());
    }
  }
  CHECK(seen.size() >= 8);
}

TEST_CASE("sequence comparisons wrap") {
  CHECK(seq_lt(0xFFFFFFF0u, 0x10u));
  CHECK_FALSE(seq_lt(0x10u, 0xFFFFFFF0u));
  CHECK(seq_le(5, 5));
}
