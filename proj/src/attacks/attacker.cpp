#include "rangesim/attacks/attacker.hpp"

namespace rangesim {

Attacker::Attacker(Network& net, std::size_t host, LabelTag initial_label)
    : net_(net),
      host_(host),
      agent_(net.host(host).agent()),
      relay_agent_(net.agents().intern(net.topology().hosts[host].name + ":relay")),
      label_(initial_label) {
  HostStack& h = net.host(host);
  h.label_source = [this] { return label_; };
  h.set_forward_hook([this](std::size_t itf, const DecodedFrame& d, const WireFrame& f) { return relay(itf, d, f); });
}

std::size_t Attacker::begin_phase(LabelTag label) {
  label_ = label;
  phases_.push_back(PhaseRecord{label, net_.now(), std::nullopt, {}});
  return phases_.size() - 1;
}

void Attacker::end_phase(std::size_t index, std::string summary) {
  PhaseRecord& p = phases_.at(index);
  p.end = net_.now();
  p.summary = std::move(summary);
}

std::optional<MacAddress> Attacker::true_mac(Ipv4Address ip) const {
  if (auto it = true_macs_.find(ip); it != true_macs_.end()) return it->second;
  if (auto e = net_.host(host_).arp().lookup(ip)) return e->mac;
  return std::nullopt;
}

void Attacker::emit_frame(Bytes frame, LabelTag label) {
  stack().send_frame_bytes(0, std::move(frame), provenance(label));
}

bool Attacker::relay(std::size_t itf, const DecodedFrame& decoded, const WireFrame& frame) {
  if (!relay_enabled_) return false;
  if (frame.provenance.relayed) {
    ++relay_loops_;
    return true;
  }
  const Ipv4Packet& packet = *decoded.frame.ipv4();
  HostStack& h = stack();
  const Interface& i = h.spec().interfaces[itf];
  const Ipv4Address hop = h.next_hop_for(itf, packet.dst);
  const auto mac = true_mac(hop);
  if (!mac) {
    ++relay_unresolved_;
    return true;
  }
  Bytes out(*frame.bytes);
  std::copy(mac->octets.begin(), mac->octets.end(), out.begin());
  std::copy(i.mac.octets.begin(), i.mac.octets.end(), out.begin() + 6);
  h.send_frame_bytes(itf, std::move(out), Provenance{relay_agent_, label_, true});

  LootRecord rec;
  rec.time = net_.now();
  rec.flow.src = packet.src;
  rec.flow.dst = packet.dst;
  rec.flow.protocol = packet.protocol();
  if (const auto* t = packet.tcp()) {
    rec.flow.src_port = t->src_port;
    rec.flow.dst_port = t->dst_port;
    rec.payload_bytes = t->payload.size();
  } else if (const auto* u = packet.udp()) {
    rec.flow.src_port = u->src_port;
    rec.flow.dst_port = u->dst_port;
    rec.payload_bytes = u->payload.size();
  } else {
    rec.payload_bytes = packet.total_length() - kIpv4HeaderLen;
  }
  loot_.push_back(rec);
  for (auto& obs : relay_observers_) obs(packet);
  return true;
}

}  // namespace rangesim
