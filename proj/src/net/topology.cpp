#include "rangesim/net/topology.hpp"

#include <algorithm>
#include <set>

namespace rangesim {

const char* to_string(OsTag os) {
  switch (os) {
    case OsTag::Windows10: return "Windows10";
    case OsTag::Ubuntu: return "Ubuntu";
    case OsTag::KaliLinux: return "KaliLinux";
  }
  return "?";
}

const char* to_string(HostRole role) {
  switch (role) {
    case HostRole::FtpServer: return "FtpServer";
    case HostRole::WebServer: return "WebServer";
    case HostRole::AdminHost: return "AdminHost";
    case HostRole::UserHost: return "UserHost";
    case HostRole::Attacker: return "Attacker";
    case HostRole::Monitor: return "Monitor";
    case HostRole::Router: return "Router";
  }
  return "?";
}

const char* to_string(ServiceKind kind) {
  switch (kind) {
    case ServiceKind::Ftp: return "ftp";
    case ServiceKind::Http: return "http";
    case ServiceKind::Ssh: return "ssh";
    case ServiceKind::Ntp: return "ntp";
  }
  return "?";
}

const char* to_string(LanId lan) {
  switch (lan) {
    case LanId::Service: return "service";
    case LanId::User: return "user";
    case LanId::Soc: return "soc";
  }
  return "?";
}

std::optional<LanId> parse_lan(std::string_view text) {
  if (text == "service") return LanId::Service;
  if (text == "user") return LanId::User;
  if (text == "soc") return LanId::Soc;
  return std::nullopt;
}

bool HostSpec::offers(std::uint16_t port, Transport t) const {
  return std::any_of(services.begin(), services.end(),
                     [&](const Service& s) { return s.port == port && s.transport == t; });
}

std::optional<std::size_t> Topology::find_host(std::string_view name) const {
  for (std::size_t i = 0; i < hosts.size(); ++i) {
    if (hosts[i].name == name) return i;
  }
  return std::nullopt;
}

std::size_t Topology::host_index(std::string_view name) const {
  if (auto i = find_host(name)) return *i;
  throw std::out_of_range("no host named '" + std::string(name) + "'");
}

std::optional<std::size_t> Topology::host_by_ip(Ipv4Address ip) const {
  for (std::size_t i = 0; i < hosts.size(); ++i) {
    for (const auto& itf : hosts[i].interfaces) {
      if (itf.ip == ip) return i;
    }
  }
  return std::nullopt;
}

std::vector<std::size_t> Topology::hosts_in(LanId lan) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < hosts.size(); ++i) {
    if (i == router) continue;
    for (const auto& itf : hosts[i].interfaces) {
      if (itf.lan == lan) {
        out.push_back(i);
        break;
      }
    }
  }
  return out;
}

std::vector<std::size_t> Topology::hosts_with_role(HostRole role) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < hosts.size(); ++i) {
    if (hosts[i].role == role) out.push_back(i);
  }
  return out;
}

namespace {

struct HostPlan {
  const char* name;
  OsTag os;
  HostRole role;
  LanId lan;
  std::uint32_t host_octet;
  std::vector<Service> services;
};

}  // namespace

Topology build_reference_topology(const TopologyConfig& config) {
  Topology topo;
  topo.link_latency = config.link_latency;
  topo.lans[0] = Lan{LanId::Service, "Service LAN", Cidr::parse("192.168.128.0/24"), {}};
  topo.lans[1] = Lan{LanId::User, "User LAN", Cidr::parse("192.168.132.0/24"), {}};
  topo.lans[2] = Lan{LanId::Soc, "SOC LAN", Cidr::parse("192.168.134.0/24"), {}};
  for (auto& lan : topo.lans) lan.gateway = lan.subnet.host(1);

  const std::vector<HostPlan> plan = {
      {"ftp-server", OsTag::Ubuntu, HostRole::FtpServer, LanId::Service, 10, {{21, ServiceKind::Ftp, Transport::Tcp}}},
      {"web-server",
       OsTag::Ubuntu,
       HostRole::WebServer,
       LanId::Service,
       20,
       {{80, ServiceKind::Http, Transport::Tcp}, {123, ServiceKind::Ntp, Transport::Udp}}},
      {"admin-win", OsTag::Windows10, HostRole::AdminHost, LanId::Service, 30, {{22, ServiceKind::Ssh, Transport::Tcp}}},
      {"admin-ubuntu", OsTag::Ubuntu, HostRole::AdminHost, LanId::Service, 31, {{22, ServiceKind::Ssh, Transport::Tcp}}},
      {"user-1", OsTag::Windows10, HostRole::UserHost, LanId::User, 10, {}},
      {"user-2", OsTag::Ubuntu, HostRole::UserHost, LanId::User, 11, {}},
      {"user-3", OsTag::Windows10, HostRole::UserHost, LanId::User, 12, {}},
      {"user-4", OsTag::Ubuntu, HostRole::UserHost, LanId::User, 13, {}},
      {"user-5", OsTag::Windows10, HostRole::UserHost, LanId::User, 14, {}},
      {"user-6", OsTag::Ubuntu, HostRole::UserHost, LanId::User, 15, {}},
      {"kali-attacker", OsTag::KaliLinux, HostRole::Attacker, LanId::User, 66, {}},
      {"soc-monitor", OsTag::KaliLinux, HostRole::Monitor, LanId::Soc, 10, {}},
  };

  std::uint32_t mac_index = 1;
  for (const auto& p : plan) {
    HostSpec h;
    h.name = p.name;
    h.os = p.os;
    h.role = p.role;
    h.services = p.services;
    const Lan& lan = topo.lan(p.lan);
    Interface itf;
    itf.lan = p.lan;
    itf.subnet = lan.subnet;
    itf.ip = lan.subnet.host(p.host_octet);
    if (auto it = config.address_overrides.find(p.name); it != config.address_overrides.end()) itf.ip = it->second;
    itf.mac = MacAddress::local(mac_index++);
    h.interfaces.push_back(itf);
    if (p.lan == LanId::Service && p.role != HostRole::Monitor) {
      h.ingress_capacity_pps = config.server_ingress_pps;
      h.ingress_queue_limit = config.server_ingress_queue;
    }
    topo.hosts.push_back(std::move(h));
  }

  HostSpec router;
  router.name = "router";
  router.os = OsTag::Ubuntu;
  router.role = HostRole::Router;
  for (const auto& lan : topo.lans) {
    Interface itf;
    itf.lan = lan.id;
    itf.subnet = lan.subnet;
    itf.ip = lan.gateway;
    itf.mac = MacAddress::local(mac_index++);
    router.interfaces.push_back(itf);
  }
  if (auto it = config.address_overrides.find("router"); it != config.address_overrides.end()) {
    throw ConfigConflict("router addresses are fixed at .1 of each LAN and cannot be overridden");
  }
  topo.hosts.push_back(std::move(router));
  topo.router = topo.hosts.size() - 1;
  topo.attacker = topo.host_index("kali-attacker");
  topo.monitor = topo.host_index("soc-monitor");

  for (const auto& [name, ip] : config.address_overrides) {
    if (!topo.find_host(name)) throw ConfigConflict("address override names unknown host '" + name + "'");
  }

  std::set<Ipv4Address> seen;
  for (const auto& h : topo.hosts) {
    for (const auto& itf : h.interfaces) {
      if (!itf.subnet.contains(itf.ip)) {
        throw ConfigConflict(h.name + " address " + itf.ip.to_string() + " is outside " + itf.subnet.to_string());
      }
      if (itf.ip == itf.subnet.network || itf.ip == itf.subnet.broadcast_address()) {
        throw ConfigConflict(h.name + " address " + itf.ip.to_string() + " is not a usable host address");
      }
      if (!seen.insert(itf.ip).second) {
        throw ConfigConflict("duplicate address " + itf.ip.to_string() + " (" + h.name + ")");
      }
    }
  }

  // One switch per LAN; ports in host order, router last. The Service
  // switch gets an extra egress-only SPAN port feeding the SOC monitor.
  for (std::size_t l = 0; l < kLanCount; ++l) {
    SwitchSpec& sw = topo.switches[l];
    sw.lan = static_cast<LanId>(l);
    for (std::size_t h = 0; h < topo.hosts.size(); ++h) {
      for (std::size_t i = 0; i < topo.hosts[h].interfaces.size(); ++i) {
        Interface& itf = topo.hosts[h].interfaces[i];
        if (itf.lan != sw.lan) continue;
        itf.switch_port = sw.ports.size();
        sw.ports.push_back(PortAttachment{h, i});
      }
    }
  }
  enable_span(topo, LanId::Service);
  return topo;
}

void enable_span(Topology& topo, LanId lan) {
  SwitchSpec& sw = topo.switches[static_cast<std::size_t>(lan)];
  if (sw.span_port) return;
  sw.span_port = sw.ports.size();
  sw.span_host = topo.monitor;
}

}  // namespace rangesim
