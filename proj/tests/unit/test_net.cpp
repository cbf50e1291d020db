#include <doctest.h>

#include <map>
#include <set>

#include "rangesim/net/arp.hpp"
#include "rangesim/net/router.hpp"
#include "rangesim/net/switch.hpp"
#include "rangesim/proto/checksum.hpp"
#include "support/testbed.hpp"

using namespace rangesim;
using rangesim::test::Testbed;

namespace {

std::size_t router_itf(const Topology& topo, LanId lan) {
  const auto& itfs = topo.hosts[topo.router].interfaces;
  for (std::size_t i = 0; i < itfs.size(); ++i) {
    if (itfs[i].lan == lan) return i;
  }
  FAIL("router has no interface on " << to_string(lan));
  return 0;
}

Bytes udp_packet(const char* src, const char* dst, std::uint8_t ttl) {
  Ipv4Packet p;
  p.src = Ipv4Address::parse(src);
  p.dst = Ipv4Address::parse(dst);
  p.ttl = ttl;
  p.identification = 0x4242;
  UdpDatagram u;
  u.src_port = 5000;
  u.dst_port = 53;
  u.payload = Bytes{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  p.payload = u;
  return encode_ipv4(p);
}

Bytes frame_bytes(const MacAddress& dst, const MacAddress& src) {
  EthernetFrame f;
  f.dst = dst;
  f.src = src;
  f.payload = RawPayload{0x88B5, Bytes(46, 0)};
  return encode_frame(f);
}

}  // namespace

TEST_CASE("reference topology subnets") {
  const Topology topo = build_reference_topology();
  std::set<std::string> subnets;
  for (const auto& lan : topo.lans) subnets.insert(lan.subnet.to_string());
  CHECK(subnets == std::set<std::string>{"192.168.128.0/24", "192.168.132.0/24", "192.168.134.0/24"});
}

TEST_CASE("reference topology hosts and services") {
  const Topology topo = build_reference_topology();
  std::size_t user_lan = 0;
  std::size_t windows = 0, ubuntu = 0;
  for (std::size_t h : topo.hosts_in(LanId::User)) {
    if (h == topo.router) continue;
    ++user_lan;
    if (topo.hosts[h].role == HostRole::UserHost) {
      windows += topo.hosts[h].os == OsTag::Windows10;
      ubuntu += topo.hosts[h].os == OsTag::Ubuntu;
    }
  }
  CHECK(user_lan == 7);
  CHECK(topo.hosts_with_role(HostRole::UserHost).size() == 6);
  CHECK(windows > 0);
  CHECK(ubuntu > 0);
  CHECK(topo.hosts[topo.attacker].os == OsTag::KaliLinux);
  CHECK(topo.hosts[topo.attacker].primary().ip.to_string() == "192.168.132.66");
  CHECK(topo.hosts[topo.monitor].os == OsTag::KaliLinux);
  CHECK(topo.hosts[topo.monitor].primary().lan == LanId::Soc);

  std::multiset<std::pair<std::string, std::uint16_t>> services;
  for (std::size_t h : topo.hosts_in(LanId::Service)) {
    for (const auto& s : topo.hosts[h].services) {
      if (s.transport == Transport::Tcp) services.insert({to_string(s.kind), s.port});
    }
  }
  CHECK(services.count({"ftp", 21}) == 1);
  CHECK(services.count({"http", 80}) == 1);
  CHECK(services.count({"ssh", 22}) == 2);
  CHECK(topo.hosts[topo.host_index("admin-win")].os == OsTag::Windows10);
  CHECK(topo.hosts[topo.host_index("admin-ubuntu")].os == OsTag::Ubuntu);
  for (std::size_t h : topo.hosts_in(LanId::User)) CHECK(topo.hosts[h].services.empty());
}

TEST_CASE("reference topology structural invariants") {
  const Topology topo = build_reference_topology();
  std::set<std::uint32_t> ips;
  std::set<MacAddress> macs;
  std::size_t itf_count = 0;
  for (const auto& h : topo.hosts) {
    std::set<LanId> lans;
    for (const auto& i : h.interfaces) {
      ++itf_count;
      CHECK(i.subnet.contains(i.ip));
      CHECK(i.subnet == topo.lan(i.lan).subnet);
      CHECK(lans.insert(i.lan).second);
      ips.insert(i.ip.value);
      macs.insert(i.mac);
      CHECK((i.mac.octets[0] & 0x03) == 0x02);
    }
  }
  CHECK(ips.size() == itf_count);
  CHECK(macs.size() == itf_count);
  CHECK(topo.hosts[topo.router].interfaces.size() == 3);
  CHECK(topo.hosts_with_role(HostRole::Router).size() == 1);
  for (const auto& lan : topo.lans) CHECK(lan.gateway.octet(3) == 1);
}

TEST_CASE("address overrides and conflicts") {
  TopologyConfig c;
  c.address_overrides["web-server"] = Ipv4Address::parse("192.168.128.80");
  const Topology topo = build_reference_topology(c);
  CHECK(topo.hosts[topo.host_index("web-server")].primary().ip.to_string() == "192.168.128.80");

  TopologyConfig dup;
  dup.address_overrides["web-server"] = Ipv4Address::parse("192.168.128.10");
  CHECK_THROWS_AS(build_reference_topology(dup), ConfigConflict);

  TopologyConfig outside;
  outside.address_overrides["web-server"] = Ipv4Address::parse("10.0.0.5");
  CHECK_THROWS_AS(build_reference_topology(outside), ConfigConflict);
}

TEST_CASE("unknown destination floods with a SPAN copy") {
  LearningSwitch sw(5, 4);
  const auto a = MacAddress::local(1), b = MacAddress::local(2);
  const auto out = sw.forward(1, frame_bytes(b, a));
  CHECK(out == std::vector<SwitchDelivery>{{0, false}, {2, false}, {3, false}, {4, true}});
  CHECK(sw.lookup(a) == 1);
}

TEST_CASE("learned destination goes to one port plus SPAN") {
  LearningSwitch sw(5, 4);
  const auto a = MacAddress::local(1), b = MacAddress::local(2);
  sw.forward(3, frame_bytes(MacAddress::broadcast(), b));
  const auto out = sw.forward(1, frame_bytes(b, a));
  CHECK(out == std::vector<SwitchDelivery>{{3, false}, {4, true}});
}

TEST_CASE("broadcast floods everywhere except ingress") {
  LearningSwitch sw(4, std::nullopt);
  const auto out = sw.forward(2, frame_bytes(MacAddress::broadcast(), MacAddress::local(9)));
  CHECK(out == std::vector<SwitchDelivery>{{0, false}, {1, false}, {3, false}});
}

TEST_CASE("frames entering the SPAN port are dropped without learning") {
  LearningSwitch sw(5, 4);
  const auto a = MacAddress::local(1);
  CHECK(sw.forward(4, frame_bytes(MacAddress::broadcast(), a)).empty());
  CHECK_FALSE(sw.lookup(a));
}

TEST_CASE("learning follows the last ingress port") {
  LearningSwitch sw(4, std::nullopt);
  const auto a = MacAddress::local(1);
  sw.forward(0, frame_bytes(MacAddress::broadcast(), a));
  sw.forward(2, frame_bytes(MacAddress::broadcast(), a));
  CHECK(sw.lookup(a) == 2);
}

TEST_CASE("router forwards with TTL decremented") {
  const Topology topo = build_reference_topology();
  const auto& itfs = topo.hosts[topo.router].interfaces;
  const Bytes in = udp_packet("192.168.132.10", "192.168.128.5", 64);
  const auto d = route_packet(itfs, router_itf(topo, LanId::User), in, 64);
  REQUIRE(std::holds_alternative<RouteForward>(d));
  const auto& fwd = std::get<RouteForward>(d);
  CHECK(fwd.interface == router_itf(topo, LanId::Service));
  CHECK(fwd.next_hop.to_string() == "192.168.128.5");
  ChecksumStatus st;
  const Ipv4Packet out = decode_ipv4(fwd.packet, &st);
  CHECK(out.ttl == 63);
  CHECK(st.all_ok());
  Bytes expected = in;
  expected[8] = 63;
  expected[10] = fwd.packet[10];
  expected[11] = fwd.packet[11];
  CHECK(fwd.packet == expected);
}

TEST_CASE("TTL 1 draws Time Exceeded") {
  const Topology topo = build_reference_topology();
  const auto& itfs = topo.hosts[topo.router].interfaces;
  const Bytes in = udp_packet("192.168.132.10", "192.168.128.5", 1);
  const auto d = route_packet(itfs, router_itf(topo, LanId::User), in, 64);
  REQUIRE(std::holds_alternative<RouteDrop>(d));
  const auto& drop = std::get<RouteDrop>(d);
  CHECK(drop.reason == RouteDrop::Reason::TtlExpired);
  REQUIRE(drop.icmp_error);
  CHECK(drop.icmp_error->dst.to_string() == "192.168.132.10");
  CHECK(drop.icmp_error->src.to_string() == "192.168.132.1");
  REQUIRE(drop.icmp_error->icmp());
  CHECK(drop.icmp_error->icmp()->type == icmp_type::kTimeExceeded);
  CHECK(drop.icmp_error->icmp()->payload == Bytes(in.begin(), in.begin() + 28));
  CHECK(drop.reply_interface == router_itf(topo, LanId::User));
}

TEST_CASE("unroutable destination draws Destination Unreachable") {
  const Topology topo = build_reference_topology();
  const auto& itfs = topo.hosts[topo.router].interfaces;
  const auto d = route_packet(itfs, router_itf(topo, LanId::User), udp_packet("192.168.132.10", "10.0.0.1", 64), 64);
  REQUIRE(std::holds_alternative<RouteDrop>(d));
  const auto& drop = std::get<RouteDrop>(d);
  CHECK(drop.reason == RouteDrop::Reason::NoRoute);
  REQUIRE(drop.icmp_error);
  CHECK(drop.icmp_error->icmp()->type == icmp_type::kDestUnreachable);
}

TEST_CASE("no ICMP error about an ICMP error") {
  const Topology topo = build_reference_topology();
  const auto& itfs = topo.hosts[topo.router].interfaces;
  Ipv4Packet p;
  p.src = Ipv4Address::parse("192.168.132.10");
  p.dst = Ipv4Address::parse("10.0.0.1");
  IcmpMessage m;
  m.type = icmp_type::kTimeExceeded;
  m.payload = Bytes(28, 0);
  p.payload = m;
  const auto d = route_packet(itfs, router_itf(topo, LanId::User), encode_ipv4(p), 64);
  REQUIRE(std::holds_alternative<RouteDrop>(d));
  CHECK_FALSE(std::get<RouteDrop>(d).icmp_error);
}

TEST_CASE("unsolicited reply overwrites the cache") {
  const Topology topo = build_reference_topology();
  const Interface& victim = topo.hosts[topo.host_index("user-1")].primary();
  const MacAddress attacker = topo.hosts[topo.attacker].primary().mac;
  ArpTable table;
  const MacAddress router_mac = topo.hosts[topo.router].interfaces[router_itf(topo, LanId::User)].mac;
  table.update(Ipv4Address::parse("192.168.132.1"), router_mac, SimTime(0), ArpOrigin::Reply);

  ArpMessage forged;
  forged.op = ArpOp::Reply;
  forged.sender_ip = Ipv4Address::parse("192.168.132.1");
  forged.sender_mac = attacker;
  forged.target_ip = victim.ip;
  forged.target_mac = victim.mac;
  CHECK_FALSE(arp_process(table, victim, forged, Seconds(5)));
  const auto e = table.lookup(Ipv4Address::parse("192.168.132.1"));
  REQUIRE(e);
  CHECK(e->mac == attacker);
  CHECK(e->updated == Seconds(5));
}

TEST_CASE("who-has for own address gets an is-at reply") {
  const Topology topo = build_reference_topology();
  const Interface& me = topo.hosts[topo.host_index("user-2")].primary();
  const Interface& asker = topo.hosts[topo.host_index("user-1")].primary();
  ArpTable table;
  const auto reply = arp_process(table, me, make_who_has(asker, me.ip), SimTime(0));
  REQUIRE(reply);
  CHECK(reply->op == ArpOp::Reply);
  CHECK(reply->sender_mac == me.mac);
  CHECK(reply->sender_ip == me.ip);
  CHECK(reply->target_mac == asker.mac);
  CHECK(table.lookup(asker.ip)->mac == asker.mac);

  CHECK_FALSE(arp_process(table, me, make_who_has(asker, Ipv4Address::parse("192.168.132.99")), SimTime(0)));
}

TEST_CASE("resolution broadcasts who-has and gives up after the timeout") {
  Testbed tb;
  tb.run(Milliseconds(10));
  std::vector<ArpMessage> requests;
  tb.net->add_delivery_observer([&](std::size_t host, std::size_t, const WireFrame& f) {
    if (host != tb.index("user-2")) return;
    const auto d = decode_frame(*f.bytes);
    if (const auto* a = d.frame.arp(); a && a->op == ArpOp::Request && a->target_ip.octet(3) == 99) {
      CHECK(d.frame.dst == MacAddress::broadcast());
      requests.push_back(*a);
    }
  });
  HostStack& h = tb.net->host("user-1");
  h.send_echo(Ipv4Address::parse("192.168.132.99"), 1, 1, Bytes(8, 0), h.provenance());
  tb.run(Milliseconds(10) + Milliseconds(900));
  CHECK(requests.size() == 1);
  CHECK(h.counters().packets_dropped_unresolved == 0);
  tb.run(Seconds(5));
  CHECK(requests.size() == 1 + HostStack::kArpRetries);
  CHECK(h.counters().packets_dropped_unresolved == 1);
  CHECK(h.counters().arp_resolution_failures == 1);
}

TEST_CASE("poisoned victim sends to the attacker MAC") {
  Testbed tb;
  tb.run(Milliseconds(10));
  const std::size_t attacker = tb.topo().attacker;
  const MacAddress attacker_mac = tb.topo().hosts[attacker].primary().mac;
  const Ipv4Address gateway = tb.topo().lan(LanId::User).gateway;

  ArpMessage forged;
  forged.op = ArpOp::Reply;
  forged.sender_ip = gateway;
  forged.sender_mac = attacker_mac;
  forged.target_ip = tb.ip("user-1");
  forged.target_mac = tb.mac("user-1");
  EthernetFrame f;
  f.dst = tb.mac("user-1");
  f.src = attacker_mac;
  f.payload = forged;
  HostStack& atk = tb.net->host(attacker);
  atk.send_frame(0, f, atk.provenance());
  tb.run(Milliseconds(20));
  CHECK(tb.net->host("user-1").arp().lookup(gateway)->mac == attacker_mac);

  int seen = 0;
  tb.net->add_delivery_observer([&](std::size_t host, std::size_t, const WireFrame& w) {
    const auto d = decode_frame(*w.bytes);
    const auto* ip = d.frame.ipv4();
    if (host == attacker && ip && ip->dst == tb.ip("web-server")) {
      CHECK(d.frame.dst == attacker_mac);
      ++seen;
    }
  });
  HostStack& victim = tb.net->host("user-1");
  victim.send_echo(tb.ip("web-server"), 7, 1, Bytes(8, 0), victim.provenance());
  tb.run(Milliseconds(40));
  CHECK(seen == 1);
}

TEST_CASE("ping across the router round-trips") {
  Testbed tb;
  tb.run(Milliseconds(10));
  int replies = 0;
  HostStack& h = tb.net->host("user-3");
  h.on_echo_reply(9, [&](const Ipv4Packet& p, const IcmpMessage& m) {
    CHECK(p.src == tb.ip("ftp-server"));
    CHECK(m.seq == 4);
    CHECK(p.ttl == 63);
    ++replies;
  });
  h.send_echo(tb.ip("ftp-server"), 9, 4, Bytes(32, 0xAB), h.provenance());
  tb.run(Seconds(1));
  CHECK(replies == 1);
}

TEST_CASE("runtime invariants over a benign run") {
  Testbed tb(3);
  const char* users[] = {"user-1", "user-2", "user-3", "user-4", "user-5", "user-6"};
  for (const char* u : users) {
    tb.lane(BenignKind::HttpBrowser, u, "web-server", Seconds(5));
    tb.lane(BenignKind::Ping, u, "ftp-server", Seconds(10));
    tb.lane(BenignKind::NtpClient, u, "web-server", Seconds(20));
  }
  tb.lane(BenignKind::SshClient, "user-1", "admin-ubuntu", Seconds(30));
  tb.lane(BenignKind::FtpClient, "user-2", "ftp-server", Seconds(30));

  std::map<const Bytes*, int> delivered_service;
  tb.net->add_delivery_observer([&](std::size_t host, std::size_t itf, const WireFrame& f) {
    if (tb.topo().hosts[host].interfaces[itf].lan == LanId::Service) ++delivered_service[f.bytes.get()];
  });
  // Emission address integrity is checked on everything that reaches a switch.
  std::uint64_t checked = 0;
  tb.net->add_delivery_observer([&](std::size_t, std::size_t, const WireFrame& f) {
    const auto d = decode_frame(*f.bytes);
    const auto* ip = d.frame.ipv4();
    if (!ip) return;
    const auto sender = std::find_if(tb.topo().hosts.begin(), tb.topo().hosts.end(), [&](const HostSpec& h) {
      return std::any_of(h.interfaces.begin(), h.interfaces.end(), [&](const Interface& i) { return i.mac == d.frame.src; });
    });
    REQUIRE(sender != tb.topo().hosts.end());
    if (sender->role == HostRole::Router) return;
    CHECK(std::any_of(sender->interfaces.begin(), sender->interfaces.end(), [&](const Interface& i) { return i.ip == ip->src; }));
    CHECK(d.checksums.all_ok());
    ++checked;
  });
  tb.run(Seconds(120));
  CHECK(checked > 1000);

  // SPAN completeness: the mirrored multiset equals what the switch sent out.
  const LearningSwitch& sw = tb.net->switch_at(LanId::Service);
  CHECK(tb.span_frames.size() == sw.forwarded_frames() + sw.flooded_frames());
  CHECK(sw.span_copies() == tb.span_frames.size());
  std::set<const Bytes*> mirrored;
  for (const auto& f : tb.span_frames) CHECK(mirrored.insert(f.bytes.get()).second);
  // Deliveries lag SPAN copies by one link; the last instant may be in flight.
  std::size_t matched = 0;
  for (const auto& [ptr, n] : delivered_service) {
    CHECK(mirrored.contains(ptr));
    matched += mirrored.contains(ptr);
  }
  CHECK(mirrored.size() - matched <= 20);

  const RouterCounters& rc = tb.net->router().router_counters();
  CHECK(rc.packets_in > 0);
  CHECK(rc.packets_in == rc.forwarded + rc.dropped_ttl + rc.dropped_no_route + rc.dropped_malformed);
  CHECK(tb.log.stats_all().success_rate() == 1.0);
}
