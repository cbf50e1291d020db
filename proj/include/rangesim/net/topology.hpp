#pragma once

// Static description of the simulated enterprise network: three LANs
// (Service, User, SOC) joined by one router, one learning switch per LAN,
// and the SOC monitor fed from the Service switch's SPAN port.

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "rangesim/engine/sim_time.hpp"
#include "rangesim/proto/addresses.hpp"

namespace rangesim {

enum class OsTag : std::uint8_t { Windows10, Ubuntu, KaliLinux };
enum class HostRole : std::uint8_t { FtpServer, WebServer, AdminHost, UserHost, Attacker, Monitor, Router };
enum class ServiceKind : std::uint8_t { Ftp, Http, Ssh, Ntp };
enum class Transport : std::uint8_t { Tcp, Udp };
enum class LanId : std::uint8_t { Service = 0, User = 1, Soc = 2 };

inline constexpr std::size_t kLanCount = 3;

const char* to_string(OsTag os);
const char* to_string(HostRole role);
const char* to_string(ServiceKind kind);
const char* to_string(LanId lan);
std::optional<LanId> parse_lan(std::string_view text);

/// 128 for Windows, 64 for the Linux family.
constexpr std::uint8_t default_ttl(OsTag os) { return os == OsTag::Windows10 ? 128 : 64; }

struct Service {
  std::uint16_t port = 0;
  ServiceKind kind = ServiceKind::Http;
  Transport transport = Transport::Tcp;
  friend bool operator==(const Service&, const Service&) = default;
};

struct Interface {
  MacAddress mac;
  Ipv4Address ip;
  Cidr subnet;
  LanId lan = LanId::Service;
  std::size_t switch_port = 0;
};

struct HostSpec {
  std::string name;
  OsTag os = OsTag::Ubuntu;
  HostRole role = HostRole::UserHost;
  std::vector<Interface> interfaces;
  std::vector<Service> services;
  /// Packets per second the host can process; 0 = unlimited.
  std::uint32_t ingress_capacity_pps = 0;
  std::uint32_t ingress_queue_limit = 0;

  std::uint8_t ttl() const { return default_ttl(os); }
  const Interface& primary() const { return interfaces.front(); }
  bool offers(std::uint16_t port, Transport t) const;
};

struct PortAttachment {
  std::size_t host = 0;
  std::size_t interface = 0;
};

struct SwitchSpec {
  LanId lan = LanId::Service;
  /// Port i connects to ports[i]. The SPAN port, if any, is the last one and
  /// has no attachment here; it feeds span_host.
  std::vector<PortAttachment> ports;
  std::optional<std::size_t> span_port;
  std::optional<std::size_t> span_host;

  std::size_t port_count() const { return ports.size() + (span_port ? 1 : 0); }
};

struct Lan {
  LanId id = LanId::Service;
  std::string name;
  Cidr subnet;
  Ipv4Address gateway;
};

struct Topology {
  std::array<Lan, kLanCount> lans;
  std::vector<HostSpec> hosts;
  std::array<SwitchSpec, kLanCount> switches;
  std::size_t router = 0;
  std::size_t attacker = 0;
  std::size_t monitor = 0;
  SimTime link_latency;

  const Lan& lan(LanId id) const { return lans[static_cast<std::size_t>(id)]; }
  const SwitchSpec& switch_of(LanId id) const { return switches[static_cast<std::size_t>(id)]; }
  std::optional<std::size_t> find_host(std::string_view name) const;
  std::size_t host_index(std::string_view name) const;  // throws std::out_of_range
  std::optional<std::size_t> host_by_ip(Ipv4Address ip) const;
  std::vector<std::size_t> hosts_in(LanId lan) const;
  std::vector<std::size_t> hosts_with_role(HostRole role) const;
};

class ConfigConflict : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct TopologyConfig {
  SimTime link_latency = Microseconds(200);
  /// host name -> address override (must stay inside the host's LAN).
  std::map<std::string, Ipv4Address> address_overrides;
  /// Packet-processing budget of each Service-LAN server host.
  std::uint32_t server_ingress_pps = 250;
  std::uint32_t server_ingress_queue = 64;
};

/// Builds the three-LAN reference network. Addresses: router .1 on every
/// LAN; Service LAN FTP .10, web .20, admin-win .30, admin-ubuntu .31;
/// User LAN user-1..6 at .10-.15, attacker .66; SOC monitor .10.
Topology build_reference_topology(const TopologyConfig& config = {});

/// Adds an egress-only SPAN port feeding the SOC monitor to the LAN's switch
/// (no-op if it already has one).
void enable_span(Topology& topo, LanId lan);

}  // namespace rangesim
