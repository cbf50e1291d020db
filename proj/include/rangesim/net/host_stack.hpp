#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "rangesim/engine/rng.hpp"
#include "rangesim/engine/scheduler.hpp"
#include "rangesim/net/arp.hpp"
#include "rangesim/net/provenance.hpp"
#include "rangesim/net/topology.hpp"
#include "rangesim/proto/tcp_connection.hpp"
#include "rangesim/proto/wire.hpp"

namespace rangesim {

class Network;

using SocketId = std::uint64_t;

struct TcpHandlers {
  std::function<void()> on_connected;
  std::function<void(const Bytes&)> on_data;
  std::function<void()> on_peer_closed;
  /// Terminal: the socket id is invalid once this returns.
  std::function<void(TcpNotice)> on_closed;
};

struct ListenerConfig {
  std::uint32_t half_open_limit = 64;
  std::uint32_t established_limit = 64;
  AgentId agent;
};

/// Called when a listener accepts a SYN; returns the new socket's handlers.
using AcceptHandler = std::function<TcpHandlers(SocketId)>;

struct ConnectionRecord {
  SocketId id = 0;
  Ipv4Address local_ip;
  std::uint16_t local_port = 0;
  Ipv4Address remote_ip;
  std::uint16_t remote_port = 0;
  bool passive = false;
  SimTime opened;
  std::optional<SimTime> established;
  std::optional<SimTime> closed;
  std::optional<TcpNotice> end;
};

struct HostCounters {
  std::uint64_t frames_received = 0;
  std::uint64_t frames_processed = 0;
  std::uint64_t ingress_drops = 0;
  std::uint64_t decode_errors = 0;
  std::uint64_t not_for_us = 0;
  std::uint64_t rst_sent = 0;
  std::uint64_t rst_suppressed = 0;
  std::uint64_t syn_dropped_backlog = 0;
  std::uint64_t arp_resolution_failures = 0;
  std::uint64_t packets_dropped_unresolved = 0;
};

struct RouterCounters {
  std::uint64_t packets_in = 0;
  std::uint64_t forwarded = 0;
  std::uint64_t dropped_ttl = 0;
  std::uint64_t dropped_no_route = 0;
  std::uint64_t dropped_malformed = 0;
};

/// Per-host network stack: NIC ingress queue, ARP, IPv4 (with forwarding on
/// the router), ICMP echo, UDP demux and TCP sockets.
class HostStack {
 public:
  static constexpr SimTime kArpTimeout = Seconds(1);
  static constexpr int kArpRetries = 1;
  static constexpr std::uint32_t kRstRatePerSecond = 100;
  static constexpr std::uint32_t kRstBurst = 100;

  HostStack(Network& network, std::size_t index);
  HostStack(const HostStack&) = delete;
  HostStack& operator=(const HostStack&) = delete;

  const HostSpec& spec() const;
  std::size_t index() const { return index_; }
  AgentId agent() const { return agent_; }
  ArpTable& arp() { return arp_; }
  const ArpTable& arp() const { return arp_; }
  const HostCounters& counters() const { return counters_; }
  const RouterCounters& router_counters() const { return router_; }
  bool is_router() const;

  /// Provenance for frames this host originates on behalf of `agent`.
  Provenance provenance(AgentId agent) const;
  Provenance provenance() const { return provenance(agent_); }
  std::function<LabelTag()> label_source;

  // --- L2/L3 output ---
  void send_ip(Ipv4Packet packet, Provenance prov);
  /// Sends already-encoded IPv4 bytes toward next_hop on an interface,
  /// resolving the link-layer address through ARP.
  void output_ip(std::size_t itf, Ipv4Address next_hop, Bytes ip_bytes, Provenance prov);
  void send_frame(std::size_t itf, const EthernetFrame& frame, Provenance prov);
  void send_frame_bytes(std::size_t itf, Bytes bytes, Provenance prov);
  std::size_t interface_for(Ipv4Address dst) const;
  Ipv4Address next_hop_for(std::size_t itf, Ipv4Address dst) const;
  std::uint16_t next_ip_id() { return ip_id_++; }

  /// Announces every interface with a gratuitous ARP.
  void boot();

  // --- TCP ---
  SocketId connect(Ipv4Address ip, std::uint16_t port, TcpHandlers handlers, AgentId agent,
                   std::optional<std::uint16_t> local_port = std::nullopt);
  void send(SocketId id, Bytes data);
  void close(SocketId id);
  void abort(SocketId id);
  bool listen(std::uint16_t port, ListenerConfig config, AcceptHandler accept);
  /// Stops accepting on the port; existing connections are unaffected.
  void unlisten(std::uint16_t port) { listeners_.erase(port); }
  std::optional<TcpState> socket_state(SocketId id) const;
  const TcpConnection* connection(SocketId id) const;
  std::size_t open_sockets() const { return sockets_.size(); }
  const std::vector<ConnectionRecord>& connection_log() const { return connection_log_; }
  std::uint32_t half_open(std::uint16_t port) const;
  std::uint32_t established(std::uint16_t port) const;

  // --- UDP / ICMP ---
  using UdpHandler = std::function<void(const Ipv4Packet&, const UdpDatagram&)>;
  void bind_udp(std::uint16_t port, UdpHandler handler);
  void unbind_udp(std::uint16_t port);
  void send_udp(Ipv4Address dst, std::uint16_t src_port, std::uint16_t dst_port, Bytes payload, Provenance prov);
  std::uint16_t ephemeral_port();

  using EchoHandler = std::function<void(const Ipv4Packet&, const IcmpMessage&)>;
  void on_echo_reply(std::uint16_t id, EchoHandler handler);
  void send_echo(Ipv4Address dst, std::uint16_t id, std::uint16_t seq, Bytes payload, Provenance prov);

  // --- hooks ---
  /// Sees every IPv4 packet delivered to this host, before L4 handling.
  using IpTap = std::function<void(const Ipv4Packet&)>;
  void add_ip_tap(IpTap tap) { taps_.push_back(std::move(tap)); }
  /// Frames addressed to our MAC but to somebody else's IP (non-routers).
  /// Returns true when the hook consumed the frame.
  using ForwardHook = std::function<bool(std::size_t itf, const DecodedFrame&, const WireFrame&)>;
  void set_forward_hook(ForwardHook hook) { forward_hook_ = std::move(hook); }

  /// Entry point from the wire.
  void receive(std::size_t itf, WireFrame frame);

 private:
  struct Socket {
    TcpConnection conn;
    Ipv4Address remote_ip;
    std::size_t itf = 0;
    TcpHandlers handlers{};
    AgentId agent;
    std::optional<EventId> timer{};
    bool passive = false;
    bool counted_half_open = false;
    bool counted_established = false;
    std::size_t log_index = 0;
  };
  struct Listener {
    ListenerConfig config;
    AcceptHandler accept;
    std::uint32_t half_open = 0;
    std::uint32_t established = 0;
  };
  struct PendingArp {
    std::size_t itf = 0;
    std::vector<std::pair<Bytes, Provenance>> packets;
    int retries = 0;
    std::optional<EventId> timer{};
  };
  using DemuxKey = std::tuple<std::uint16_t, std::uint32_t, std::uint16_t>;

  void process(std::size_t itf, const WireFrame& frame);
  void handle_arp(std::size_t itf, const ArpMessage& msg);
  void handle_ip(std::size_t itf, const DecodedFrame& decoded, const WireFrame& frame);
  void deliver_local(const Ipv4Packet& packet, const WireFrame& frame);
  void route(std::size_t itf, const WireFrame& frame);
  void handle_tcp(const Ipv4Packet& packet, const TcpSegment& seg);
  void handle_icmp(const Ipv4Packet& packet, const IcmpMessage& msg);
  void handle_udp(const Ipv4Packet& packet, const UdpDatagram& dgram);
  void arp_timeout(Ipv4Address ip);
  void flush_pending(Ipv4Address ip);
  void send_segment(const Socket& s, const TcpSegment& seg);
  void send_reset(Ipv4Address to, const TcpSegment& offending, std::size_t itf);
  bool take_rst_token();
  void apply(SocketId id, TcpStepResult result);
  void finish(SocketId id, TcpNotice why);
  std::uint32_t next_isn();
  Listener* listener_for(std::uint16_t port);

  Network& net_;
  std::size_t index_;
  AgentId agent_;
  ArpTable arp_;
  std::map<Ipv4Address, PendingArp> pending_arp_;
  std::uint16_t ip_id_;
  HostCounters counters_;
  RouterCounters router_;

  SimTime busy_until_{};
  std::uint32_t in_ingress_ = 0;

  SocketId next_socket_ = 1;
  std::unordered_map<SocketId, Socket> sockets_;
  std::map<DemuxKey, SocketId> demux_;
  std::map<std::uint16_t, Listener> listeners_;
  std::multiset<std::uint16_t> local_ports_;
  std::vector<ConnectionRecord> connection_log_;
  std::uint64_t connections_made_ = 0;
  RngStream port_rng_;

  std::map<std::uint16_t, UdpHandler> udp_;
  std::map<std::uint16_t, EchoHandler> echo_;
  std::vector<IpTap> taps_;
  ForwardHook forward_hook_;

  std::uint64_t rst_tokens_;  // scaled by 1e9
  SimTime rst_refill_at_{};
};

}  // namespace rangesim
