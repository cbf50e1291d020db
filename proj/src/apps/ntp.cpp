#include "rangesim/apps/ntp.hpp"

namespace rangesim::ntp {

namespace {

void put32(Bytes& b, std::size_t at, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) b[at + i] = static_cast<std::uint8_t>(v >> (24 - 8 * i));
}
void put64(Bytes& b, std::size_t at, std::uint64_t v) {
  put32(b, at, static_cast<std::uint32_t>(v >> 32));
  put32(b, at + 4, static_cast<std::uint32_t>(v));
}
std::uint32_t get32(std::span<const std::uint8_t> b, std::size_t at) {
  return (std::uint32_t{b[at]} << 24) | (std::uint32_t{b[at + 1]} << 16) | (std::uint32_t{b[at + 2]} << 8) | b[at + 3];
}
std::uint64_t get64(std::span<const std::uint8_t> b, std::size_t at) {
  return (std::uint64_t{get32(b, at)} << 32) | get32(b, at + 4);
}

}  // namespace

std::uint64_t to_timestamp(SimTime t) {
  const std::uint64_t secs = t.ns() / 1'000'000'000ULL;
  const std::uint64_t frac_ns = t.ns() % 1'000'000'000ULL;
  const std::uint64_t frac = (frac_ns << 32) / 1'000'000'000ULL;
  return (secs << 32) | frac;
}

SimTime from_timestamp(std::uint64_t ts) {
  const std::uint64_t secs = ts >> 32;
  const std::uint64_t frac = ts & 0xFFFFFFFFULL;
  // Round up so that from_timestamp(to_timestamp(t)) == t.
  const std::uint64_t ns = (frac * 1'000'000'000ULL + 0xFFFFFFFFULL) >> 32;
  return SimTime(secs * 1'000'000'000ULL + ns);
}

Bytes encode(const Packet& p) {
  Bytes b(kPacketLen, 0);
  b[0] = static_cast<std::uint8_t>((p.leap << 6) | ((p.version & 7) << 3) | (p.mode & 7));
  b[1] = p.stratum;
  b[2] = p.poll;
  b[3] = static_cast<std::uint8_t>(p.precision);
  put32(b, 4, p.root_delay);
  put32(b, 8, p.root_dispersion);
  put32(b, 12, p.reference_id);
  put64(b, 16, p.reference_ts);
  put64(b, 24, p.originate_ts);
  put64(b, 32, p.receive_ts);
  put64(b, 40, p.transmit_ts);
  return b;
}

std::optional<Packet> decode(std::span<const std::uint8_t> b) {
  if (b.size() < kPacketLen) return std::nullopt;
  Packet p;
  p.leap = b[0] >> 6;
  p.version = (b[0] >> 3) & 7;
  p.mode = b[0] & 7;
  p.stratum = b[1];
  p.poll = b[2];
  p.precision = static_cast<std::int8_t>(b[3]);
  p.root_delay = get32(b, 4);
  p.root_dispersion = get32(b, 8);
  p.reference_id = get32(b, 12);
  p.reference_ts = get64(b, 16);
  p.originate_ts = get64(b, 24);
  p.receive_ts = get64(b, 32);
  p.transmit_ts = get64(b, 40);
  return p;
}

Packet make_request(SimTime now) {
  Packet p;
  p.mode = kModeClient;
  p.transmit_ts = to_timestamp(now);
  return p;
}

Packet make_response(const Packet& request, SimTime now) {
  Packet p;
  p.version = request.version;
  p.mode = kModeServer;
  p.stratum = 2;
  p.poll = request.poll;
  p.root_delay = 0x00000100;
  p.root_dispersion = 0x00000200;
  p.reference_id = 0x7F7F0101;
  p.reference_ts = to_timestamp(now);
  p.originate_ts = request.transmit_ts;
  p.receive_ts = to_timestamp(now);
  p.transmit_ts = to_timestamp(now);
  return p;
}

}  // namespace rangesim::ntp
