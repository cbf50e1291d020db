#include "rangesim/attacks/operations.hpp"

namespace rangesim {

const ScannedHost* ScanReport::find(Ipv4Address ip) const {
  for (const auto& h : hosts) {
    if (h.ip == ip) return &h;
  }
  return nullptr;
}

OsTag infer_os(std::uint8_t ttl) { return ttl > 64 ? OsTag::Windows10 : OsTag::Ubuntu; }

std::optional<ServiceKind> guess_service(std::uint16_t port) {
  switch (port) {
    case 21: return ServiceKind::Ftp;
    case 22: return ServiceKind::Ssh;
    case 80:
    case 8080: return ServiceKind::Http;
    case 123: return ServiceKind::Ntp;
    default: return std::nullopt;
  }
}

NetworkScan::NetworkScan(Attacker& attacker, ScanConfig config, std::function<void(const ScanReport&)> done)
    : attacker_(attacker), config_(std::move(config)), done_(std::move(done)) {
  RngStream rng(attacker.net().seed(), "attacker/scan/" + config_.subnet.to_string());
  echo_id_ = static_cast<std::uint16_t>(rng.next_u64());
  src_port_ = static_cast<std::uint16_t>(rng.uniform_range(40000, 60000));
}

void NetworkScan::start() {
  label_ = attacker_.label();
  report_.probe_targets = config_.subnet.host_count();
  std::weak_ptr<NetworkScan> w = shared_from_this();
  attacker_.stack().add_ip_tap([w](const Ipv4Packet& p) {
    if (auto s = w.lock()) s->on_packet(p);
  });
  sweep(1);
}

void NetworkScan::sweep(std::uint32_t index) {
  if (index > config_.subnet.host_count()) {
    auto self = shared_from_this();
    attacker_.net().scheduler().schedule_in(config_.reply_wait, EventKind::AgentWakeup, [self] { self->probe_phase(); });
    return;
  }
  const Ipv4Address target = config_.subnet.host(index);
  HostStack& h = attacker_.stack();
  if (target != attacker_.itf().ip) {
    ++probes_;
    h.send_echo(target, echo_id_, static_cast<std::uint16_t>(index), Bytes(32, 0x61), attacker_.provenance(label_));
  }
  auto self = shared_from_this();
  attacker_.net().scheduler().schedule_in(config_.probe_spacing, EventKind::AgentWakeup,
                                          [self, index] { self->sweep(index + 1); });
}

void NetworkScan::probe_phase() {
  if (responders_.empty() || config_.ports.empty()) {
    finish();
    return;
  }
  probe(0, 0);
}

void NetworkScan::probe(std::size_t target, std::size_t port) {
  auto it = std::next(responders_.begin(), static_cast<std::ptrdiff_t>(target));
  HostStack& h = attacker_.stack();
  Ipv4Packet p;
  p.ttl = h.spec().ttl();
  p.src = attacker_.itf().ip;
  p.dst = it->first;
  TcpSegment syn;
  syn.src_port = src_port_;
  syn.dst_port = config_.ports[port];
  syn.seq = static_cast<std::uint32_t>(splitmix64_mix(it->first.value ^ (std::uint64_t{syn.dst_port} << 32)));
  syn.flags = tcp_flag::kSyn;
  syn.window = 1024;
  p.payload = syn;
  ++probes_;
  h.send_ip(std::move(p), attacker_.provenance(label_));

  std::size_t next_target = target;
  std::size_t next_port = port + 1;
  if (next_port == config_.ports.size()) {
    next_port = 0;
    ++next_target;
  }
  auto self = shared_from_this();
  if (next_target == responders_.size()) {
    attacker_.net().scheduler().schedule_in(config_.reply_wait, EventKind::AgentWakeup, [self] { self->finish(); });
    return;
  }
  attacker_.net().scheduler().schedule_in(config_.probe_spacing, EventKind::AgentWakeup,
                                          [self, next_target, next_port] { self->probe(next_target, next_port); });
}

void NetworkScan::on_packet(const Ipv4Packet& p) {
  if (finished_) return;
  if (const auto* icmp = p.icmp()) {
    if (icmp->type == icmp_type::kEchoReply && icmp->id == echo_id_ && config_.subnet.contains(p.src)) {
      responders_.try_emplace(p.src, p.ttl);
    }
    return;
  }
  const auto* tcp = p.tcp();
  if (!tcp || tcp->dst_port != src_port_ || !responders_.count(p.src)) return;
  const auto key = std::make_pair(p.src.value, tcp->src_port);
  if (tcp->has(tcp_flag::kSyn | tcp_flag::kAck)) {
    port_state_[key] = true;
  } else if (tcp->has(tcp_flag::kRst)) {
    port_state_.try_emplace(key, false);
  }
}

void NetworkScan::finish() {
  if (finished_) return;
  finished_ = true;
  const HostStack& h = attacker_.stack();
  for (const auto& [ip, ttl] : responders_) {
    ScannedHost host;
    host.ip = ip;
    host.reply_ttl = ttl;
    host.os = infer_os(ttl);
    if (attacker_.itf().subnet.contains(ip)) {
      if (auto e = h.arp().lookup(ip)) host.mac = e->mac;
    }
    for (std::uint16_t port : config_.ports) {
      auto it = port_state_.find({ip.value, port});
      if (it != port_state_.end() && it->second) {
        host.open_ports.push_back(ScannedPort{port, guess_service(port)});
      } else {
        ++host.closed_ports;
      }
    }
    report_.hosts.push_back(std::move(host));
  }
  if (done_) done_(report_);
}

}  // namespace rangesim
