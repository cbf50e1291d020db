#pragma once

#include <functional>
#include <memory>
#include <set>

#include "rangesim/apps/services.hpp"
#include "rangesim/attacks/attacker.hpp"
#include "rangesim/engine/rng.hpp"

namespace rangesim {

// ---------------------------------------------------------------- scan

inline const std::vector<std::uint16_t>& default_scan_ports() {
  static const std::vector<std::uint16_t> ports = {21, 22, 23, 25, 53, 80, 110, 139, 143, 443, 445, 3389, 8080};
  return ports;
}

struct ScannedPort {
  std::uint16_t port = 0;
  std::optional<ServiceKind> guess;
  friend bool operator==(const ScannedPort&, const ScannedPort&) = default;
};

struct ScannedHost {
  Ipv4Address ip;
  /// Known only for hosts on the attacker's own LAN.
  std::optional<MacAddress> mac;
  std::uint8_t reply_ttl = 0;
  OsTag os = OsTag::Ubuntu;
  std::vector<ScannedPort> open_ports;
  std::size_t closed_ports = 0;
};

struct ScanReport {
  std::size_t probe_targets = 0;
  std::vector<ScannedHost> hosts;
  const ScannedHost* find(Ipv4Address ip) const;
};

/// 128-family TTLs (anything above 64 after routing) mean Windows.
OsTag infer_os(std::uint8_t ttl);
std::optional<ServiceKind> guess_service(std::uint16_t port);

struct ScanConfig {
  Cidr subnet;
  std::vector<std::uint16_t> ports = default_scan_ports();
  SimTime probe_spacing = Milliseconds(10);
  SimTime reply_wait = Seconds(1);
};

/// ICMP sweep of every host address, then half-open SYN probes of each
/// responder. Calls `done` once the report is assembled.
class NetworkScan : public std::enable_shared_from_this<NetworkScan> {
 public:
  NetworkScan(Attacker& attacker, ScanConfig config, std::function<void(const ScanReport&)> done);
  void start();
  const ScanReport& report() const { return report_; }
  bool finished() const { return finished_; }
  std::uint64_t probes_sent() const { return probes_; }

 private:
  void sweep(std::uint32_t index);
  void probe_phase();
  void probe(std::size_t target, std::size_t port);
  void finish();
  void on_packet(const Ipv4Packet& p);

  Attacker& attacker_;
  ScanConfig config_;
  std::function<void(const ScanReport&)> done_;
  ScanReport report_;
  std::map<Ipv4Address, std::uint8_t> responders_;
  std::map<std::pair<std::uint32_t, std::uint16_t>, bool> port_state_;
  LabelTag label_ = LabelTag::Benign;
  std::uint16_t echo_id_ = 0;
  std::uint16_t src_port_ = 0;
  std::uint64_t probes_ = 0;
  bool finished_ = false;
};

// ---------------------------------------------------------------- ARP poisoning

struct PoisonPair {
  Ipv4Address a;
  Ipv4Address b;
};

/// Every `period` from start until stop(), tells each side of each pair that
/// the other side is at the attacker's MAC; stop() sends corrective replies.
class ArpPoison : public std::enable_shared_from_this<ArpPoison> {
 public:
  ArpPoison(Attacker& attacker, std::vector<PoisonPair> pairs, SimTime period, const ScanReport* scan = nullptr);
  /// Resolves victim MACs (throws UnknownVictimMac) and sends the first round.
  void start();
  void stop();
  std::uint64_t rounds() const { return rounds_; }
  std::uint64_t replies_sent() const { return replies_; }
  bool active() const { return active_; }

 private:
  void round();
  void send_reply(Ipv4Address claimed_ip, const MacAddress& claimed_mac, Ipv4Address to_ip, const MacAddress& to_mac);

  Attacker& attacker_;
  std::vector<PoisonPair> pairs_;
  SimTime period_;
  const ScanReport* scan_;
  std::map<Ipv4Address, MacAddress> macs_;
  LabelTag label_ = LabelTag::Benign;
  std::optional<EventId> next_;
  std::uint64_t rounds_ = 0;
  std::uint64_t replies_ = 0;
  bool active_ = false;
};

// ---------------------------------------------------------------- floods

struct FloodStats {
  std::uint64_t emitted = 0;
  std::uint64_t icmp = 0;
  std::uint64_t igmp = 0;
  std::uint64_t tcp = 0;
};

struct FloodConfig {
  Ipv4Address target;
  std::uint16_t port = 80;
  double rate = 1000.0;
  SimTime duration = Seconds(60);
  /// Fraction of ICMP packets in the ICMP/IGMP flood.
  double icmp_fraction = 0.5;
  /// Randomize source addresses inside the attacker's subnet.
  bool spoof_source = false;
};

enum class FloodKind : std::uint8_t { PshAck, IcmpIgmp };

/// Packets on a 1/rate lattice from start, each displaced by up to ±10% of
/// the spacing.
class Flood : public std::enable_shared_from_this<Flood> {
 public:
  Flood(Attacker& attacker, FloodKind kind, FloodConfig config, RngStream rng);
  void start();
  const FloodStats& stats() const { return stats_; }
  std::uint64_t planned() const;
  /// Emission instants relative to the start, reproducing the jitter draws.
  static std::vector<SimTime> schedule(double rate, SimTime duration, RngStream rng);

 private:
  void fire();
  void emit();
  Ipv4Address source();

  Attacker& attacker_;
  FloodKind kind_;
  FloodConfig config_;
  RngStream timing_;
  RngStream payload_;
  SimTime start_;
  LabelTag label_ = LabelTag::Benign;
  std::uint64_t next_k_ = 0;
  FloodStats stats_;
};

// ---------------------------------------------------------------- TCP killer

struct KillRecord {
  SimTime time;
  Ipv4Address client;
  std::uint16_t client_port = 0;
  Ipv4Address server;
  std::uint16_t server_port = 0;
  std::uint32_t client_seq = 0;
  std::uint32_t server_seq = 0;
};

/// Watches relayed traffic and resets every connection seen established.
/// Poisoning and relay are arranged by the caller.
class TcpKiller {
 public:
  explicit TcpKiller(Attacker& attacker);
  void start();
  void stop();
  bool active() const { return active_; }
  const std::vector<KillRecord>& kills() const { return kills_; }
  std::uint64_t rsts_sent() const { return rsts_; }

 private:
  struct Track {
    Ipv4Address client;
    std::uint16_t client_port = 0;
    Ipv4Address server;
    std::uint16_t server_port = 0;
    std::uint32_t client_next = 0;
    std::uint32_t server_next = 0;
    bool syn_seen = false;
    bool synack_seen = false;
    bool killed = false;
  };
  using Key = std::tuple<std::uint32_t, std::uint16_t, std::uint32_t, std::uint16_t>;

  void observe(const Ipv4Packet& p);
  void kill(Track& t);
  void forge(Ipv4Address src, std::uint16_t sport, Ipv4Address dst, std::uint16_t dport, std::uint32_t seq);

  Attacker& attacker_;
  std::map<Key, Track> tracks_;
  std::vector<KillRecord> kills_;
  std::uint64_t rsts_ = 0;
  LabelTag label_ = LabelTag::Benign;
  bool active_ = false;
};

// ---------------------------------------------------------------- brute force

struct Wordlist {
  std::vector<Credentials> pairs;
  /// 1-based position of the valid pair, if present.
  std::optional<std::size_t> correct_index;

  /// `size` candidates; when `correct` is set it is placed at a uniformly
  /// drawn position.
  static Wordlist generate(RngStream rng, std::size_t size, const std::optional<Credentials>& correct,
                           std::string_view user_hint);
};

struct BruteForceAttempt {
  std::size_t index = 0;
  Credentials creds;
  SimTime started;
  SimTime finished;
  bool success = false;
  std::string reason;
};

enum class BruteForceService : std::uint8_t { Ssh, Ftp };

class BruteForce : public std::enable_shared_from_this<BruteForce> {
 public:
  BruteForce(Attacker& attacker, BruteForceService service, Ipv4Address target, Wordlist wordlist,
             SimTime attempt_interval, std::function<void()> done = nullptr);
  void start();
  const std::vector<BruteForceAttempt>& attempts() const { return attempts_; }
  std::size_t failures() const;
  bool succeeded() const;
  bool finished() const { return finished_; }
  std::optional<SimTime> finished_at() const { return finished_at_; }

 private:
  void attempt(std::size_t i);
  void complete(std::size_t i, const ExchangeResult& r);

  Attacker& attacker_;
  BruteForceService service_;
  Ipv4Address target_;
  Wordlist wordlist_;
  SimTime interval_;
  std::function<void()> done_;
  std::vector<BruteForceAttempt> attempts_;
  bool finished_ = false;
  std::optional<SimTime> finished_at_;
};

}  // namespace rangesim
