#pragma once

#include <map>
#include <optional>

#include "rangesim/engine/sim_time.hpp"
#include "rangesim/net/topology.hpp"
#include "rangesim/proto/wire.hpp"

namespace rangesim {

enum class ArpOrigin : std::uint8_t { Request, Reply, Gratuitous };

struct ArpEntry {
  MacAddress mac;
  SimTime updated;
  ArpOrigin origin = ArpOrigin::Reply;
};

/// Neighbor cache with no expiry. Any ARP message naming an IP overwrites
/// its entry, solicited or not: the cache is deliberately poisonable.
class ArpTable {
 public:
  std::optional<ArpEntry> lookup(Ipv4Address ip) const;
  void update(Ipv4Address ip, const MacAddress& mac, SimTime now, ArpOrigin origin);
  std::size_t size() const { return entries_.size(); }
  const std::map<Ipv4Address, ArpEntry>& entries() const { return entries_; }

 private:
  std::map<Ipv4Address, ArpEntry> entries_;
};

/// Processes one ARP message received on `itf`. The sender binding is
/// written unconditionally (unless it claims our own address); a who-has for
/// our address yields a unicast is-at reply.
std::optional<ArpMessage> arp_process(ArpTable& table, const Interface& itf, const ArpMessage& msg, SimTime now);

ArpMessage make_who_has(const Interface& itf, Ipv4Address target);
ArpMessage make_gratuitous(const Interface& itf);

}  // namespace rangesim
