#include <cmath>

#include "rangesim/attacks/operations.hpp"

namespace rangesim {

namespace {

double spacing_ns(double rate) { return 1e9 / rate; }

std::uint64_t lattice_count(double rate, SimTime duration) {
  return static_cast<std::uint64_t>(std::ceil(static_cast<double>(duration.ns()) / spacing_ns(rate) - 1e-9));
}

std::uint64_t lattice_offset(double rate, std::uint64_t k) {
  return static_cast<std::uint64_t>(std::llround(static_cast<double>(k) * spacing_ns(rate)));
}

std::int64_t jitter(RngStream& rng, double rate) {
  const auto j = static_cast<std::int64_t>(std::floor(0.1 * spacing_ns(rate)));
  return static_cast<std::int64_t>(rng.uniform(static_cast<std::uint64_t>(2 * j + 1))) - j;
}

std::uint64_t jittered(std::uint64_t base, std::int64_t j) {
  return j < 0 && static_cast<std::uint64_t>(-j) > base ? 0 : base + j;
}

}  // namespace

Flood::Flood(Attacker& attacker, FloodKind kind, FloodConfig config, RngStream rng)
    : attacker_(attacker), kind_(kind), config_(config), timing_(rng.fork("timing")), payload_(rng.fork("payload")) {
  if (!(config_.rate > 0.0)) throw std::invalid_argument("flood rate must be > 0");
  if (config_.icmp_fraction < 0.0 || config_.icmp_fraction > 1.0) {
    throw std::invalid_argument("icmp fraction must be within [0, 1]");
  }
}

std::uint64_t Flood::planned() const { return lattice_count(config_.rate, config_.duration); }

std::vector<SimTime> Flood::schedule(double rate, SimTime duration, RngStream rng) {
  RngStream timing = rng.fork("timing");
  std::vector<SimTime> out;
  const std::uint64_t n = lattice_count(rate, duration);
  out.reserve(n);
  for (std::uint64_t k = 0; k < n; ++k) out.emplace_back(jittered(lattice_offset(rate, k), jitter(timing, rate)));
  return out;
}

void Flood::start() {
  start_ = attacker_.net().now();
  label_ = attacker_.label();
  next_k_ = 0;
  if (planned() == 0) return;
  const SimTime at = start_ + SimTime(jittered(lattice_offset(config_.rate, 0), jitter(timing_, config_.rate)));
  auto self = shared_from_this();
  attacker_.net().scheduler().schedule(std::max(at, start_), EventKind::AgentWakeup, [self] { self->fire(); });
}

void Flood::fire() {
  emit();
  ++next_k_;
  if (next_k_ >= planned()) return;
  const SimTime at =
      start_ + SimTime(jittered(lattice_offset(config_.rate, next_k_), jitter(timing_, config_.rate)));
  auto self = shared_from_this();
  attacker_.net().scheduler().schedule(std::max(at, attacker_.net().now()), EventKind::AgentWakeup,
                                       [self] { self->fire(); });
}

Ipv4Address Flood::source() {
  const Interface& i = attacker_.itf();
  if (!config_.spoof_source) return i.ip;
  return i.subnet.host(static_cast<std::uint32_t>(payload_.uniform_range(2, i.subnet.host_count())));
}

void Flood::emit() {
  HostStack& h = attacker_.stack();
  Ipv4Packet p;
  p.ttl = h.spec().ttl();
  p.src = source();
  p.dst = config_.target;
  if (kind_ == FloodKind::PshAck) {
    TcpSegment seg;
    seg.src_port = static_cast<std::uint16_t>(payload_.uniform_range(1024, 65535));
    seg.dst_port = config_.port;
    seg.seq = static_cast<std::uint32_t>(payload_.next_u64());
    seg.ack = static_cast<std::uint32_t>(payload_.next_u64());
    seg.flags = tcp_flag::kPsh | tcp_flag::kAck;
    seg.window = static_cast<std::uint16_t>(payload_.uniform_range(512, 65535));
    seg.payload.resize(payload_.uniform_range(16, 64));
    for (auto& b : seg.payload) b = static_cast<std::uint8_t>(payload_.next_u64());
    p.payload = std::move(seg);
    ++stats_.tcp;
  } else if (payload_.bernoulli(config_.icmp_fraction)) {
    IcmpMessage m;
    m.type = icmp_type::kEchoRequest;
    m.id = static_cast<std::uint16_t>(payload_.next_u64());
    m.seq = static_cast<std::uint16_t>(next_k_);
    m.payload.resize(1400);
    std::uint64_t state = payload_.next_u64();
    for (std::size_t i = 0; i < m.payload.size(); i += 8) {
      state = splitmix64_mix(state);
      for (std::size_t b = 0; b < 8 && i + b < m.payload.size(); ++b) {
        m.payload[i + b] = static_cast<std::uint8_t>(state >> (8 * b));
      }
    }
    p.payload = std::move(m);
    ++stats_.icmp;
  } else {
    IgmpMessage m;
    m.type = igmp_type::kV2MembershipReport;
    m.group = Ipv4Address(239, static_cast<std::uint8_t>(payload_.uniform(256)),
                          static_cast<std::uint8_t>(payload_.uniform(256)),
                          static_cast<std::uint8_t>(payload_.uniform_range(1, 254)));
    p.payload = m;
    ++stats_.igmp;
  }
  ++stats_.emitted;
  h.send_ip(std::move(p), attacker_.provenance(label_));
}

}  // namespace rangesim
