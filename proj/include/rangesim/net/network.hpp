#pragma once

#include <array>
#include <functional>
#include <memory>
#include <vector>

#include "rangesim/engine/scheduler.hpp"
#include "rangesim/net/host_stack.hpp"
#include "rangesim/net/provenance.hpp"
#include "rangesim/net/switch.hpp"
#include "rangesim/net/topology.hpp"

namespace rangesim {

/// Runtime of a Topology: host stacks, one learning switch per LAN, and
/// links with a fixed per-hop latency. Switches forward instantly; a frame
/// crosses host->switch and switch->host links, each costing link_latency.
class Network {
 public:
  using SpanSink = std::function<void(LanId, const WireFrame&, SimTime)>;
  using DeliveryObserver = std::function<void(std::size_t host, std::size_t itf, const WireFrame&)>;

  Network(Scheduler& scheduler, Topology topology, std::uint64_t seed);
  ~Network();
  Network(const Network&) = delete;
  Network& operator=(const Network&) = delete;

  Scheduler& scheduler() { return scheduler_; }
  SimTime now() const { return scheduler_.now(); }
  std::uint64_t seed() const { return seed_; }
  const Topology& topology() const { return topology_; }
  AgentRegistry& agents() { return agents_; }
  const AgentRegistry& agents() const { return agents_; }

  HostStack& host(std::size_t index) { return *hosts_.at(index); }
  const HostStack& host(std::size_t index) const { return *hosts_.at(index); }
  HostStack& host(std::string_view name) { return host(topology_.host_index(name)); }
  HostStack& router() { return host(topology_.router); }
  LearningSwitch& switch_at(LanId lan) { return switches_[static_cast<std::size_t>(lan)]; }
  const LearningSwitch& switch_at(LanId lan) const { return switches_[static_cast<std::size_t>(lan)]; }

  /// Schedules the boot-time gratuitous ARP of every host at the current time.
  /// The monitor and the attacker stay silent.
  void boot();

  /// NIC egress: the frame reaches the host's switch one link latency later.
  void transmit(std::size_t host, std::size_t itf, WireFrame frame);

  void add_span_sink(SpanSink sink) { span_sinks_.push_back(std::move(sink)); }
  void add_delivery_observer(DeliveryObserver obs) { observers_.push_back(std::move(obs)); }

  std::uint64_t frames_transmitted() const { return frames_transmitted_; }

 private:
  void switch_ingress(LanId lan, std::size_t port, const WireFrame& frame);

  Scheduler& scheduler_;
  Topology topology_;
  std::uint64_t seed_;
  AgentRegistry agents_;
  std::vector<std::unique_ptr<HostStack>> hosts_;
  std::vector<LearningSwitch> switches_;
  std::vector<SpanSink> span_sinks_;
  std::vector<DeliveryObserver> observers_;
  std::uint64_t frames_transmitted_ = 0;
};

}  // namespace rangesim
