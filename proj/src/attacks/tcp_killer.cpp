#include "rangesim/attacks/operations.hpp"

namespace rangesim {

TcpKiller::TcpKiller(Attacker& attacker) : attacker_(attacker) {
  attacker_.add_relay_observer([this](const Ipv4Packet& p) { observe(p); });
}

void TcpKiller::start() {
  label_ = attacker_.label();
  active_ = true;
}

void TcpKiller::stop() { active_ = false; }

void TcpKiller::observe(const Ipv4Packet& p) {
  if (!active_) return;
  const TcpSegment* seg = p.tcp();
  if (!seg) return;

  const Key fwd{p.src.value, seg->src_port, p.dst.value, seg->dst_port};
  const Key rev{p.dst.value, seg->dst_port, p.src.value, seg->src_port};

  if (seg->has(tcp_flag::kSyn) && !seg->has(tcp_flag::kAck)) {
    Track t;
    t.client = p.src;
    t.client_port = seg->src_port;
    t.server = p.dst;
    t.server_port = seg->dst_port;
    t.client_next = seg->seq + 1;
    t.syn_seen = true;
    tracks_[fwd] = t;
    return;
  }

  auto it = tracks_.find(fwd);
  bool from_client = true;
  if (it == tracks_.end()) {
    it = tracks_.find(rev);
    from_client = false;
  }

  if (it == tracks_.end()) {
    if (seg->flags & (tcp_flag::kFin | tcp_flag::kRst | tcp_flag::kSyn)) return;
    Track t;
    t.client = p.src;
    t.client_port = seg->src_port;
    t.server = p.dst;
    t.server_port = seg->dst_port;
    t.client_next = seg->seq + seg->seq_len();
    t.server_next = seg->ack;
    auto [ins, ok] = tracks_.emplace(fwd, t);
    kill(ins->second);
    return;
  }

  Track& t = it->second;
  if (seg->has(tcp_flag::kRst)) {
    tracks_.erase(it);
    return;
  }
  if (t.killed) return;
  if (seg->has(tcp_flag::kSyn | tcp_flag::kAck)) {
    if (!from_client) {
      t.server_next = seg->seq + 1;
      t.synack_seen = true;
    }
    return;
  }
  if (from_client) {
    t.client_next = seg->seq + seg->seq_len();
    if (seg->has(tcp_flag::kAck)) t.server_next = seg->ack;
  } else {
    t.server_next = seg->seq + seg->seq_len();
    if (seg->has(tcp_flag::kAck)) t.client_next = seg->ack;
  }
  const bool established = t.syn_seen ? (t.synack_seen && from_client && seg->has(tcp_flag::kAck)) : true;
  if (established) kill(t);
}

void TcpKiller::kill(Track& t) {
  t.killed = true;
  forge(t.client, t.client_port, t.server, t.server_port, t.client_next);
  forge(t.server, t.server_port, t.client, t.client_port, t.server_next);
  kills_.push_back(KillRecord{attacker_.net().now(), t.client, t.client_port, t.server, t.server_port, t.client_next,
                              t.server_next});
}

void TcpKiller::forge(Ipv4Address src, std::uint16_t sport, Ipv4Address dst, std::uint16_t dport, std::uint32_t seq) {
  HostStack& h = attacker_.stack();
  const Ipv4Address hop = h.next_hop_for(0, dst);
  const auto mac = attacker_.true_mac(hop);
  if (!mac) return;
  Ipv4Packet p;
  p.ttl = 64;
  p.identification = h.next_ip_id();
  p.src = src;
  p.dst = dst;
  TcpSegment rst;
  rst.src_port = sport;
  rst.dst_port = dport;
  rst.seq = seq;
  rst.flags = tcp_flag::kRst;
  rst.window = 0;
  p.payload = rst;
  ++rsts_;
  attacker_.emit_frame(encode_frame(EthernetFrame{*mac, attacker_.itf().mac, std::move(p)}), label_);
}

}  // namespace rangesim
