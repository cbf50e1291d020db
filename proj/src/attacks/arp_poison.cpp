#include "rangesim/attacks/operations.hpp"

namespace rangesim {

ArpPoison::ArpPoison(Attacker& attacker, std::vector<PoisonPair> pairs, SimTime period, const ScanReport* scan)
    : attacker_(attacker), pairs_(std::move(pairs)), period_(period), scan_(scan) {
  if (period_.ns() == 0) throw std::invalid_argument("poison period must be > 0");
}

void ArpPoison::start() {
  label_ = attacker_.label();
  auto resolve = [&](Ipv4Address ip) {
    if (macs_.count(ip)) return;
    std::optional<MacAddress> mac;
    if (scan_) {
      if (const auto* h = scan_->find(ip)) mac = h->mac;
    }
    if (!mac) mac = attacker_.true_mac(ip);
    if (!mac) throw UnknownVictimMac("no MAC known for " + ip.to_string());
    macs_[ip] = *mac;
    attacker_.remember(ip, *mac);
  };
  for (const auto& p : pairs_) {
    resolve(p.a);
    resolve(p.b);
  }
  active_ = true;
  round();
}

void ArpPoison::round() {
  next_.reset();
  if (!active_) return;
  ++rounds_;
  const MacAddress& self_mac = attacker_.itf().mac;
  for (const auto& p : pairs_) {
    send_reply(p.b, self_mac, p.a, macs_.at(p.a));
    send_reply(p.a, self_mac, p.b, macs_.at(p.b));
  }
  std::weak_ptr<ArpPoison> w = shared_from_this();
  next_ = attacker_.net().scheduler().schedule_in(period_, EventKind::AgentWakeup, [w] {
    if (auto s = w.lock()) s->round();
  });
}

void ArpPoison::stop() {
  if (!active_) return;
  active_ = false;
  if (next_) attacker_.net().scheduler().cancel(*next_);
  next_.reset();
  for (const auto& p : pairs_) {
    send_reply(p.b, macs_.at(p.b), p.a, macs_.at(p.a));
    send_reply(p.a, macs_.at(p.a), p.b, macs_.at(p.b));
  }
}

void ArpPoison::send_reply(Ipv4Address claimed_ip, const MacAddress& claimed_mac, Ipv4Address to_ip,
                           const MacAddress& to_mac) {
  ArpMessage m;
  m.op = ArpOp::Reply;
  m.sender_ip = claimed_ip;
  m.sender_mac = claimed_mac;
  m.target_ip = to_ip;
  m.target_mac = to_mac;
  ++replies_;
  attacker_.emit_frame(encode_frame(EthernetFrame{to_mac, attacker_.itf().mac, m}), label_);
}

}  // namespace rangesim
