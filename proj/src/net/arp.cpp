#include "rangesim/net/arp.hpp"

namespace rangesim {

std::optional<ArpEntry> ArpTable::lookup(Ipv4Address ip) const {
  if (auto it = entries_.find(ip); it != entries_.end()) return it->second;
  return std::nullopt;
}

void ArpTable::update(Ipv4Address ip, const MacAddress& mac, SimTime now, ArpOrigin origin) {
  entries_[ip] = ArpEntry{mac, now, origin};
}

std::optional<ArpMessage> arp_process(ArpTable& table, const Interface& itf, const ArpMessage& msg, SimTime now) {
  const bool gratuitous = msg.sender_ip == msg.target_ip;
  if (msg.sender_ip != itf.ip && msg.sender_ip.value != 0 && !msg.sender_mac.is_multicast()) {
    const ArpOrigin origin = gratuitous ? ArpOrigin::Gratuitous
                             : msg.op == ArpOp::Request ? ArpOrigin::Request
                                                        : ArpOrigin::Reply;
    table.update(msg.sender_ip, msg.sender_mac, now, origin);
  }
  if (msg.op == ArpOp::Request && !gratuitous && msg.target_ip == itf.ip) {
    ArpMessage reply;
    reply.op = ArpOp::Reply;
    reply.sender_mac = itf.mac;
    reply.sender_ip = itf.ip;
    reply.target_mac = msg.sender_mac;
    reply.target_ip = msg.sender_ip;
    return reply;
  }
  return std::nullopt;
}

ArpMessage make_who_has(const Interface& itf, Ipv4Address target) {
  ArpMessage m;
  m.op = ArpOp::Request;
  m.sender_mac = itf.mac;
  m.sender_ip = itf.ip;
  m.target_mac = MacAddress::zero();
  m.target_ip = target;
  return m;
}

ArpMessage make_gratuitous(const Interface& itf) {
  ArpMessage m;
  m.op = ArpOp::Request;
  m.sender_mac = itf.mac;
  m.sender_ip = itf.ip;
  m.target_mac = MacAddress::zero();
  m.target_ip = itf.ip;
  return m;
}

}  // namespace rangesim
