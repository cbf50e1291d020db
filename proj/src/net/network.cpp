#include "rangesim/net/network.hpp"

namespace rangesim {

Network::Network(Scheduler& scheduler, Topology topology, std::uint64_t seed)
    : scheduler_(scheduler), topology_(std::move(topology)), seed_(seed) {
  agents_.intern("none");
  for (std::size_t l = 0; l < kLanCount; ++l) {
    const SwitchSpec& spec = topology_.switches[l];
    switches_.emplace_back(spec.port_count(), spec.span_port);
  }
  hosts_.reserve(topology_.hosts.size());
  for (std::size_t i = 0; i < topology_.hosts.size(); ++i) hosts_.push_back(std::make_unique<HostStack>(*this, i));
}

Network::~Network() = default;

void Network::boot() {
  for (auto& h : hosts_) {
    const HostRole role = h->spec().role;
    if (role == HostRole::Monitor || role == HostRole::Attacker) continue;
    scheduler_.schedule(now(), EventKind::Timer, [stack = h.get()] { stack->boot(); });
  }
}

void Network::transmit(std::size_t host, std::size_t itf, WireFrame frame) {
  ++frames_transmitted_;
  const Interface& i = topology_.hosts[host].interfaces[itf];
  const LanId lan = i.lan;
  const std::size_t port = i.switch_port;
  scheduler_.schedule_in(topology_.link_latency, EventKind::FrameDelivery,
                         [this, lan, port, f = std::move(frame)] { switch_ingress(lan, port, f); });
}

void Network::switch_ingress(LanId lan, std::size_t port, const WireFrame& frame) {
  const SwitchSpec& spec = topology_.switch_of(lan);
  for (const SwitchDelivery& d : switch_at(lan).forward(port, *frame.bytes)) {
    if (d.span) {
      for (auto& sink : span_sinks_) sink(lan, frame, now());
      continue;
    }
    const PortAttachment att = spec.ports.at(d.port);
    scheduler_.schedule_in(topology_.link_latency, EventKind::FrameDelivery, [this, att, frame] {
      for (auto& obs : observers_) obs(att.host, att.interface, frame);
      hosts_[att.host]->receive(att.interface, frame);
    });
  }
}

}  // namespace rangesim
