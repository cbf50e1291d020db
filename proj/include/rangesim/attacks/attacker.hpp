#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rangesim/net/network.hpp"

namespace rangesim {

class UnknownVictimMac : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class EmptyWordlist : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct FiveTuple {
  Ipv4Address src;
  Ipv4Address dst;
  std::uint16_t src_port = 0;
  std::uint16_t dst_port = 0;
  std::uint8_t protocol = 0;
  friend auto operator<=>(const FiveTuple&, const FiveTuple&) = default;
};

/// One frame relayed by the man-in-the-middle.
struct LootRecord {
  SimTime time;
  FiveTuple flow;
  std::size_t payload_bytes = 0;
};

struct PhaseRecord {
  LabelTag label = LabelTag::Benign;
  SimTime start;
  std::optional<SimTime> end;
  std::string summary;
};

/// The Kali host's attack runtime: current phase label (stamped on every
/// frame the host emits), the MitM relay and its loot log, and the true
/// link-layer bindings learned before any poisoning.
class Attacker {
 public:
  /// Observes each relayed IPv4 packet after it has been forwarded.
  using RelayObserver = std::function<void(const Ipv4Packet&)>;

  Attacker(Network& net, std::size_t host, LabelTag initial_label);
  Attacker(const Attacker&) = delete;
  Attacker& operator=(const Attacker&) = delete;

  Network& net() { return net_; }
  HostStack& stack() { return net_.host(host_); }
  std::size_t host() const { return host_; }
  const Interface& itf() const { return net_.topology().hosts[host_].primary(); }
  AgentId agent() const { return agent_; }
  AgentId relay_agent() const { return relay_agent_; }

  LabelTag label() const { return label_; }
  void set_label(LabelTag label) { label_ = label; }
  Provenance provenance() const { return Provenance{agent_, label_, false}; }
  Provenance provenance(LabelTag label) const { return Provenance{agent_, label, false}; }

  /// Opens a phase record; the label becomes current.
  std::size_t begin_phase(LabelTag label);
  void end_phase(std::size_t index, std::string summary);
  const std::vector<PhaseRecord>& phases() const { return phases_; }

  /// Real MAC of an address: remembered binding, else the host's ARP cache.
  std::optional<MacAddress> true_mac(Ipv4Address ip) const;
  void remember(Ipv4Address ip, const MacAddress& mac) { true_macs_[ip] = mac; }

  void enable_relay(bool on) { relay_enabled_ = on; }
  bool relay_enabled() const { return relay_enabled_; }
  void add_relay_observer(RelayObserver obs) { relay_observers_.push_back(std::move(obs)); }
  const std::vector<LootRecord>& loot() const { return loot_; }
  std::uint64_t relay_loops_dropped() const { return relay_loops_; }
  std::uint64_t relay_unresolved() const { return relay_unresolved_; }

  /// Sends a raw Ethernet frame from the attacker NIC.
  void emit_frame(Bytes frame) { emit_frame(std::move(frame), label_); }
  void emit_frame(Bytes frame, LabelTag label);

 private:
  bool relay(std::size_t itf, const DecodedFrame& decoded, const WireFrame& frame);

  Network& net_;
  std::size_t host_;
  AgentId agent_;
  AgentId relay_agent_;
  LabelTag label_;
  std::vector<PhaseRecord> phases_;
  std::map<Ipv4Address, MacAddress> true_macs_;
  bool relay_enabled_ = false;
  std::vector<RelayObserver> relay_observers_;
  std::vector<LootRecord> loot_;
  std::uint64_t relay_loops_ = 0;
  std::uint64_t relay_unresolved_ = 0;
};

}  // namespace rangesim
