#include "rangesim/net/host_stack.hpp"

#include "rangesim/net/network.hpp"
#include "rangesim/net/router.hpp"

namespace rangesim {

namespace {

constexpr std::uint64_t kTokenScale = 1'000'000'000ULL;

Bytes ethernet_wrap(const MacAddress& dst, const MacAddress& src, std::uint16_t type,
                    std::span<const std::uint8_t> payload) {
  Bytes out;
  out.reserve(std::max(kEthernetMinFrame, kEthernetHeaderLen + payload.size()));
  out.insert(out.end(), dst.octets.begin(), dst.octets.end());
  out.insert(out.end(), src.octets.begin(), src.octets.end());
  out.push_back(static_cast<std::uint8_t>(type >> 8));
  out.push_back(static_cast<std::uint8_t>(type));
  out.insert(out.end(), payload.begin(), payload.end());
  if (out.size() < kEthernetMinFrame) out.resize(kEthernetMinFrame, 0);
  return out;
}

bool is_terminal(TcpNotice n) {
  return n == TcpNotice::Closed || n == TcpNotice::Reset || n == TcpNotice::Refused || n == TcpNotice::TimedOut ||
         n == TcpNotice::Aborted;
}

}  // namespace

HostStack::HostStack(Network& network, std::size_t index)
    : net_(network),
      index_(index),
      agent_(network.agents().intern(network.topology().hosts[index].name)),
      ip_id_(static_cast<std::uint16_t>(fnv1a64(network.topology().hosts[index].name))),
      port_rng_(network.seed(), network.topology().hosts[index].name + "/ephemeral"),
      rst_tokens_(std::uint64_t{kRstBurst} * kTokenScale) {}

const HostSpec& HostStack::spec() const { return net_.topology().hosts[index_]; }

bool HostStack::is_router() const { return spec().role == HostRole::Router; }

Provenance HostStack::provenance(AgentId agent) const {
  return Provenance{agent, label_source ? label_source() : LabelTag::Benign, false};
}

// ---------------------------------------------------------------- output

std::size_t HostStack::interface_for(Ipv4Address dst) const {
  const auto& itfs = spec().interfaces;
  for (std::size_t i = 0; i < itfs.size(); ++i) {
    if (itfs[i].subnet.contains(dst)) return i;
  }
  return 0;
}

Ipv4Address HostStack::next_hop_for(std::size_t itf, Ipv4Address dst) const {
  const Interface& i = spec().interfaces[itf];
  if (i.subnet.contains(dst) || dst.value == 0xFFFFFFFF) return dst;
  return net_.topology().lan(i.lan).gateway;
}

void HostStack::send_frame_bytes(std::size_t itf, Bytes bytes, Provenance prov) {
  net_.transmit(index_, itf, make_wire_frame(std::move(bytes), prov));
}

void HostStack::send_frame(std::size_t itf, const EthernetFrame& frame, Provenance prov) {
  send_frame_bytes(itf, encode_frame(frame), prov);
}

void HostStack::send_ip(Ipv4Packet packet, Provenance prov) {
  const std::size_t itf = interface_for(packet.dst);
  if (packet.identification == 0) packet.identification = next_ip_id();
  output_ip(itf, next_hop_for(itf, packet.dst), encode_ipv4(packet), prov);
}

void HostStack::output_ip(std::size_t itf, Ipv4Address next_hop, Bytes ip_bytes, Provenance prov) {
  const Interface& i = spec().interfaces[itf];
  if (next_hop == i.subnet.broadcast_address() || next_hop.value == 0xFFFFFFFF) {
    send_frame_bytes(itf, ethernet_wrap(MacAddress::broadcast(), i.mac, ethertype::kIpv4, ip_bytes), prov);
    return;
  }
  if (auto entry = arp_.lookup(next_hop)) {
    send_frame_bytes(itf, ethernet_wrap(entry->mac, i.mac, ethertype::kIpv4, ip_bytes), prov);
    return;
  }
  auto [it, fresh] = pending_arp_.try_emplace(next_hop);
  it->second.itf = itf;
  it->second.packets.emplace_back(std::move(ip_bytes), prov);
  if (!fresh) return;
  send_frame(itf, EthernetFrame{MacAddress::broadcast(), i.mac, make_who_has(i, next_hop)}, provenance());
  it->second.timer = net_.scheduler().schedule_in(kArpTimeout, EventKind::Timer,
                                                  [this, next_hop] { arp_timeout(next_hop); });
}

void HostStack::arp_timeout(Ipv4Address ip) {
  auto it = pending_arp_.find(ip);
  if (it == pending_arp_.end()) return;
  PendingArp& p = it->second;
  if (p.retries < kArpRetries) {
    ++p.retries;
    const Interface& i = spec().interfaces[p.itf];
    send_frame(p.itf, EthernetFrame{MacAddress::broadcast(), i.mac, make_who_has(i, ip)}, provenance());
    p.timer = net_.scheduler().schedule_in(kArpTimeout, EventKind::Timer, [this, ip] { arp_timeout(ip); });
    return;
  }
  ++counters_.arp_resolution_failures;
  counters_.packets_dropped_unresolved += p.packets.size();
  pending_arp_.erase(it);
}

void HostStack::flush_pending(Ipv4Address ip) {
  auto it = pending_arp_.find(ip);
  if (it == pending_arp_.end()) return;
  const auto entry = arp_.lookup(ip);
  if (!entry) return;
  PendingArp p = std::move(it->second);
  pending_arp_.erase(it);
  if (p.timer) net_.scheduler().cancel(*p.timer);
  const Interface& i = spec().interfaces[p.itf];
  for (auto& [bytes, prov] : p.packets) {
    send_frame_bytes(p.itf, ethernet_wrap(entry->mac, i.mac, ethertype::kIpv4, bytes), prov);
  }
}

void HostStack::boot() {
  const auto& itfs = spec().interfaces;
  for (std::size_t i = 0; i < itfs.size(); ++i) {
    send_frame(i, EthernetFrame{MacAddress::broadcast(), itfs[i].mac, make_gratuitous(itfs[i])}, provenance());
  }
}

// ---------------------------------------------------------------- input

void HostStack::receive(std::size_t itf, WireFrame frame) {
  ++counters_.frames_received;
  const HostSpec& s = spec();
  if (s.ingress_capacity_pps == 0) {
    process(itf, frame);
    return;
  }
  if (in_ingress_ >= s.ingress_queue_limit) {
    ++counters_.ingress_drops;
    return;
  }
  const SimTime service(kTokenScale / s.ingress_capacity_pps);
  const SimTime start = std::max(net_.now(), busy_until_);
  busy_until_ = start + service;
  ++in_ingress_;
  net_.scheduler().schedule(busy_until_, EventKind::FrameDelivery, [this, itf, f = std::move(frame)] {
    --in_ingress_;
    process(itf, f);
  });
}

void HostStack::process(std::size_t itf, const WireFrame& frame) {
  ++counters_.frames_processed;
  DecodedFrame decoded;
  try {
    decoded = decode_frame(*frame.bytes);
  } catch (const DecodeError&) {
    ++counters_.decode_errors;
    return;
  }
  const Interface& i = spec().interfaces[itf];
  const bool for_us = decoded.frame.dst == i.mac || decoded.frame.dst.is_broadcast() ||
                      decoded.frame.dst.is_multicast();
  if (!for_us) {
    ++counters_.not_for_us;
    return;
  }
  if (const auto* arp = decoded.frame.arp()) {
    handle_arp(itf, *arp);
  } else if (decoded.frame.ipv4()) {
    handle_ip(itf, decoded, frame);
  }
}

void HostStack::handle_arp(std::size_t itf, const ArpMessage& msg) {
  const Interface& i = spec().interfaces[itf];
  if (auto reply = arp_process(arp_, i, msg, net_.now())) {
    send_frame(itf, EthernetFrame{msg.sender_mac, i.mac, *reply}, provenance());
  }
  flush_pending(msg.sender_ip);
}

void HostStack::handle_ip(std::size_t itf, const DecodedFrame& decoded, const WireFrame& frame) {
  const Ipv4Packet& packet = *decoded.frame.ipv4();
  const auto& itfs = spec().interfaces;
  for (const auto& own : itfs) {
    if (packet.dst == own.ip) {
      deliver_local(packet, frame);
      return;
    }
  }
  if (packet.dst.is_multicast() || packet.dst.value == 0xFFFFFFFF ||
      packet.dst == itfs[itf].subnet.broadcast_address()) {
    deliver_local(packet, frame);
    return;
  }
  if (is_router()) {
    route(itf, frame);
    return;
  }
  if (forward_hook_ && decoded.frame.dst == itfs[itf].mac && forward_hook_(itf, decoded, frame)) return;
  ++counters_.not_for_us;
}

void HostStack::route(std::size_t itf, const WireFrame& frame) {
  ++router_.packets_in;
  const auto ip = std::span<const std::uint8_t>(*frame.bytes).subspan(kEthernetHeaderLen);
  const auto& itfs = spec().interfaces;
  RouteDecision d = route_packet(itfs, itf, ip, spec().ttl());
  if (auto* fwd = std::get_if<RouteForward>(&d)) {
    ++router_.forwarded;
    output_ip(fwd->interface, fwd->next_hop, std::move(fwd->packet), frame.provenance);
    return;
  }
  auto& drop = std::get<RouteDrop>(d);
  switch (drop.reason) {
    case RouteDrop::Reason::TtlExpired: ++router_.dropped_ttl; break;
    case RouteDrop::Reason::NoRoute: ++router_.dropped_no_route; break;
    case RouteDrop::Reason::Malformed: ++router_.dropped_malformed; break;
  }
  if (drop.icmp_error) send_ip(std::move(*drop.icmp_error), provenance());
}

void HostStack::deliver_local(const Ipv4Packet& packet, const WireFrame&) {
  for (auto& tap : taps_) tap(packet);
  if (const auto* seg = packet.tcp()) {
    handle_tcp(packet, *seg);
  } else if (const auto* msg = packet.icmp()) {
    handle_icmp(packet, *msg);
  } else if (const auto* d = packet.udp()) {
    handle_udp(packet, *d);
  }
}

void HostStack::handle_icmp(const Ipv4Packet& packet, const IcmpMessage& msg) {
  const auto& itfs = spec().interfaces;
  const bool unicast_to_us =
      std::any_of(itfs.begin(), itfs.end(), [&](const Interface& i) { return i.ip == packet.dst; });
  if (msg.type == icmp_type::kEchoRequest && unicast_to_us) {
    Ipv4Packet reply;
    reply.ttl = spec().ttl();
    reply.src = packet.dst;
    reply.dst = packet.src;
    IcmpMessage m;
    m.type = icmp_type::kEchoReply;
    m.id = msg.id;
    m.seq = msg.seq;
    m.payload = msg.payload;
    reply.payload = std::move(m);
    send_ip(std::move(reply), provenance());
  } else if (msg.type == icmp_type::kEchoReply) {
    if (auto it = echo_.find(msg.id); it != echo_.end()) {
      auto handler = it->second;
      handler(packet, msg);
    }
  }
}

void HostStack::handle_udp(const Ipv4Packet& packet, const UdpDatagram& d) {
  if (auto it = udp_.find(d.dst_port); it != udp_.end()) {
    auto handler = it->second;
    handler(packet, d);
    return;
  }
  if (packet.dst.is_multicast() || !take_rst_token()) return;
  Bytes original = encode_ipv4(packet);
  send_ip(make_icmp_error(packet.dst, spec().ttl(), icmp_type::kDestUnreachable, 3, original), provenance());
}

// ---------------------------------------------------------------- TCP

bool HostStack::take_rst_token() {
  const SimTime now = net_.now();
  const std::uint64_t elapsed = (now - rst_refill_at_).ns();
  rst_refill_at_ = now;
  const std::uint64_t cap = std::uint64_t{kRstBurst} * kTokenScale;
  const std::uint64_t gain = elapsed > cap ? cap : elapsed * kRstRatePerSecond;
  rst_tokens_ = std::min(cap, rst_tokens_ + gain);
  if (rst_tokens_ < kTokenScale) return false;
  rst_tokens_ -= kTokenScale;
  return true;
}

void HostStack::send_reset(Ipv4Address to, const TcpSegment& offending, std::size_t itf) {
  auto rst = TcpConnection::reset_for(offending);
  if (!rst) return;
  if (!take_rst_token()) {
    ++counters_.rst_suppressed;
    return;
  }
  ++counters_.rst_sent;
  Ipv4Packet p;
  p.ttl = spec().ttl();
  p.src = spec().interfaces[itf].ip;
  p.dst = to;
  p.payload = std::move(*rst);
  send_ip(std::move(p), provenance());
}

HostStack::Listener* HostStack::listener_for(std::uint16_t port) {
  auto it = listeners_.find(port);
  return it == listeners_.end() ? nullptr : &it->second;
}

std::uint32_t HostStack::next_isn() {
  RngStream s(net_.seed(), spec().name + "/isn/" + std::to_string(connections_made_++));
  return static_cast<std::uint32_t>(s.next_u64());
}

std::uint16_t HostStack::ephemeral_port() {
  for (int attempt = 0; attempt < 64; ++attempt) {
    const auto p = static_cast<std::uint16_t>(port_rng_.uniform_range(49152, 65535));
    if (local_ports_.count(p) == 0 && udp_.count(p) == 0) return p;
  }
  for (std::uint32_t p = 49152; p <= 65535; ++p) {
    if (local_ports_.count(static_cast<std::uint16_t>(p)) == 0 && udp_.count(static_cast<std::uint16_t>(p)) == 0) {
      return static_cast<std::uint16_t>(p);
    }
  }
  throw std::runtime_error(spec().name + ": ephemeral ports exhausted");
}

void HostStack::handle_tcp(const Ipv4Packet& packet, const TcpSegment& seg) {
  const std::size_t itf = interface_for(packet.src);
  const DemuxKey key{seg.dst_port, packet.src.value, seg.src_port};
  if (auto it = demux_.find(key); it != demux_.end()) {
    const SocketId id = it->second;
    Socket& s = sockets_.at(id);
    apply(id, s.conn.step(seg));
    return;
  }
  Listener* l = listener_for(seg.dst_port);
  const bool bare_syn = (seg.flags & (tcp_flag::kSyn | tcp_flag::kAck | tcp_flag::kRst)) == tcp_flag::kSyn;
  if (!l || !bare_syn) {
    send_reset(packet.src, seg, itf);
    return;
  }
  if (l->half_open >= l->config.half_open_limit || l->established >= l->config.established_limit) {
    ++counters_.syn_dropped_backlog;
    return;
  }
  const SocketId id = next_socket_++;
  Socket s{.conn = TcpConnection(seg.dst_port, seg.src_port, next_isn()),
           .remote_ip = packet.src,
           .itf = itf,
           .agent = l->config.agent};
  s.passive = true;
  s.counted_half_open = true;
  ++l->half_open;
  s.log_index = connection_log_.size();
  connection_log_.push_back(ConnectionRecord{id, packet.dst, seg.dst_port, packet.src, seg.src_port, true,
                                             net_.now(), std::nullopt, std::nullopt, std::nullopt});
  s.conn.step(tcp_cmd::Listen{});
  sockets_.emplace(id, std::move(s));
  demux_[key] = id;
  local_ports_.insert(seg.dst_port);
  sockets_.at(id).handlers = l->accept(id);
  apply(id, sockets_.at(id).conn.step(seg));
}

void HostStack::send_segment(const Socket& s, const TcpSegment& seg) {
  Ipv4Packet p;
  p.ttl = spec().ttl();
  p.src = spec().interfaces[s.itf].ip;
  p.dst = s.remote_ip;
  p.payload = seg;
  send_ip(std::move(p), provenance(s.agent));
}

void HostStack::apply(SocketId id, TcpStepResult r) {
  auto it = sockets_.find(id);
  if (it == sockets_.end()) return;
  Socket& s = it->second;
  for (const auto& seg : r.emitted) send_segment(s, seg);

  if ((r.cancel_timer || r.arm_timer) && s.timer) {
    net_.scheduler().cancel(*s.timer);
    s.timer.reset();
  }
  if (r.arm_timer) {
    const bool retransmit = r.arm_timer->kind == TcpTimerRequest::Kind::Retransmit;
    s.timer = net_.scheduler().schedule_in(r.arm_timer->delay, EventKind::Timer, [this, id, retransmit] {
      auto sit = sockets_.find(id);
      if (sit == sockets_.end()) return;
      sit->second.timer.reset();
      if (retransmit) {
        apply(id, sit->second.conn.step(tcp_cmd::RetransmitTimeout{}));
      } else {
        apply(id, sit->second.conn.step(tcp_cmd::TimeWaitTimeout{}));
      }
    });
  }

  std::optional<TcpNotice> terminal;
  bool connected = false;
  bool peer_closed = false;
  for (TcpNotice n : r.notices) {
    if (n == TcpNotice::Connected) connected = true;
    else if (n == TcpNotice::PeerClosed) peer_closed = true;
    else if (is_terminal(n)) terminal = n;
  }

  if (connected) {
    ConnectionRecord& rec = connection_log_[s.log_index];
    rec.established = net_.now();
    if (s.passive) {
      if (Listener* l = listener_for(s.conn.local_port())) {
        if (s.counted_half_open && l->half_open > 0) --l->half_open;
        ++l->established;
      }
      s.counted_half_open = false;
      s.counted_established = true;
    }
    if (auto cb = s.handlers.on_connected) {
      cb();
      if (!sockets_.count(id)) return;
    }
  }
  if (!r.delivered.empty()) {
    if (auto cb = sockets_.at(id).handlers.on_data) {
      cb(r.delivered);
      if (!sockets_.count(id)) return;
    }
  }
  if (peer_closed) {
    if (auto cb = sockets_.at(id).handlers.on_peer_closed) {
      cb();
      if (!sockets_.count(id)) return;
    }
  }
  if (terminal) finish(id, *terminal);
}

void HostStack::finish(SocketId id, TcpNotice why) {
  auto it = sockets_.find(id);
  if (it == sockets_.end()) return;
  Socket s = std::move(it->second);
  sockets_.erase(it);
  if (s.timer) net_.scheduler().cancel(*s.timer);
  demux_.erase(DemuxKey{s.conn.local_port(), s.remote_ip.value, s.conn.remote_port()});
  if (auto pit = local_ports_.find(s.conn.local_port()); pit != local_ports_.end()) local_ports_.erase(pit);
  if (s.passive) {
    if (Listener* l = listener_for(s.conn.local_port())) {
      if (s.counted_half_open && l->half_open > 0) --l->half_open;
      if (s.counted_established && l->established > 0) --l->established;
    }
  }
  ConnectionRecord& rec = connection_log_[s.log_index];
  rec.closed = net_.now();
  rec.end = why;
  if (s.handlers.on_closed) s.handlers.on_closed(why);
}

SocketId HostStack::connect(Ipv4Address ip, std::uint16_t port, TcpHandlers handlers, AgentId agent,
                            std::optional<std::uint16_t> local_port) {
  const std::uint16_t lport = local_port ? *local_port : ephemeral_port();
  const std::size_t itf = interface_for(ip);
  const SocketId id = next_socket_++;
  Socket s{.conn = TcpConnection(lport, port, next_isn()),
           .remote_ip = ip,
           .itf = itf,
           .handlers = std::move(handlers),
           .agent = agent};
  s.log_index = connection_log_.size();
  connection_log_.push_back(ConnectionRecord{id, spec().interfaces[itf].ip, lport, ip, port, false, net_.now(),
                                             std::nullopt, std::nullopt, std::nullopt});
  sockets_.emplace(id, std::move(s));
  demux_[DemuxKey{lport, ip.value, port}] = id;
  local_ports_.insert(lport);
  apply(id, sockets_.at(id).conn.step(tcp_cmd::OpenActive{}));
  return id;
}

void HostStack::send(SocketId id, Bytes data) {
  auto it = sockets_.find(id);
  if (it == sockets_.end()) return;
  apply(id, it->second.conn.step(tcp_cmd::Send{std::move(data)}));
}

void HostStack::close(SocketId id) {
  auto it = sockets_.find(id);
  if (it == sockets_.end()) return;
  apply(id, it->second.conn.step(tcp_cmd::Close{}));
}

void HostStack::abort(SocketId id) {
  auto it = sockets_.find(id);
  if (it == sockets_.end()) return;
  apply(id, it->second.conn.step(tcp_cmd::Abort{}));
}

bool HostStack::listen(std::uint16_t port, ListenerConfig config, AcceptHandler accept) {
  if (listeners_.count(port)) return false;
  listeners_.emplace(port, Listener{config, std::move(accept)});
  return true;
}

std::optional<TcpState> HostStack::socket_state(SocketId id) const {
  auto it = sockets_.find(id);
  if (it == sockets_.end()) return std::nullopt;
  return it->second.conn.state();
}

const TcpConnection* HostStack::connection(SocketId id) const {
  auto it = sockets_.find(id);
  return it == sockets_.end() ? nullptr : &it->second.conn;
}

std::uint32_t HostStack::half_open(std::uint16_t port) const {
  auto it = listeners_.find(port);
  return it == listeners_.end() ? 0 : it->second.half_open;
}

std::uint32_t HostStack::established(std::uint16_t port) const {
  auto it = listeners_.find(port);
  return it == listeners_.end() ? 0 : it->second.established;
}

// ---------------------------------------------------------------- UDP / ICMP

void HostStack::bind_udp(std::uint16_t port, UdpHandler handler) { udp_[port] = std::move(handler); }

void HostStack::unbind_udp(std::uint16_t port) { udp_.erase(port); }

void HostStack::send_udp(Ipv4Address dst, std::uint16_t src_port, std::uint16_t dst_port, Bytes payload,
                         Provenance prov) {
  Ipv4Packet p;
  p.ttl = spec().ttl();
  p.src = spec().interfaces[interface_for(dst)].ip;
  p.dst = dst;
  p.payload = UdpDatagram{src_port, dst_port, std::nullopt, std::move(payload)};
  send_ip(std::move(p), prov);
}

void HostStack::on_echo_reply(std::uint16_t id, EchoHandler handler) {
  if (handler) {
    echo_[id] = std::move(handler);
  } else {
    echo_.erase(id);
  }
}

void HostStack::send_echo(Ipv4Address dst, std::uint16_t id, std::uint16_t seq, Bytes payload, Provenance prov) {
  Ipv4Packet p;
  p.ttl = spec().ttl();
  p.src = spec().interfaces[interface_for(dst)].ip;
  p.dst = dst;
  IcmpMessage m;
  m.type = icmp_type::kEchoRequest;
  m.id = id;
  m.seq = seq;
  m.payload = std::move(payload);
  p.payload = std::move(m);
  send_ip(std::move(p), prov);
}

}  // namespace rangesim
