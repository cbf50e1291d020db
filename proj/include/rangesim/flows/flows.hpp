#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "rangesim/net/provenance.hpp"
#include "rangesim/proto/addresses.hpp"
#include "rangesim/engine/sim_time.hpp"

namespace rangesim {

/// Canonical bidirectional 5-tuple: (ip_lo, port_lo) is the numerically
/// smaller endpoint.
struct FlowKey {
  Ipv4Address ip_lo;
  Ipv4Address ip_hi;
  std::uint16_t port_lo = 0;
  std::uint16_t port_hi = 0;
  std::uint8_t protocol = 0;
  friend auto operator<=>(const FlowKey&, const FlowKey&) = default;
};

struct FlowKeyHash {
  std::size_t operator()(const FlowKey& k) const noexcept;
};

/// Fields of one IPv4 packet relevant to flow metering.
struct PacketInfo {
  Ipv4Address src;
  Ipv4Address dst;
  std::uint16_t src_port = 0;
  std::uint16_t dst_port = 0;
  std::uint8_t protocol = 0;
  std::uint8_t tcp_flags = 0;
  /// IPv4 total length.
  std::uint32_t length = 0;
};

enum class FrameClass : std::uint8_t { Ipv4, Arp, Other };

/// Classifies an Ethernet frame and extracts flow fields from IPv4 ones.
FrameClass classify_frame(std::span<const std::uint8_t> frame, PacketInfo& info);

FlowKey make_flow_key(const PacketInfo& p);

struct DirectionStats {
  std::uint64_t packets = 0;
  std::uint64_t bytes = 0;
  std::uint32_t len_min = 0;
  std::uint32_t len_max = 0;
  double len_mean = 0.0;
  double len_std = 0.0;
  double iat_mean = 0.0;
  double iat_std = 0.0;
  std::uint64_t syn = 0;
  std::uint64_t ack = 0;
  std::uint64_t psh = 0;
  std::uint64_t fin = 0;
  std::uint64_t rst = 0;
};

struct FlowRecord {
  std::uint64_t flow_id = 0;
  FlowKey key;
  /// Initiator endpoint (forward direction).
  Ipv4Address src_ip;
  std::uint16_t src_port = 0;
  Ipv4Address dst_ip;
  std::uint16_t dst_port = 0;
  std::uint8_t protocol = 0;
  SimTime start;
  SimTime end;
  DirectionStats fwd;
  DirectionStats bwd;
  /// Packet count per label and the order in which labels first appeared.
  std::array<std::uint64_t, kLabelCount> label_counts{};
  std::vector<LabelTag> label_order;
  LabelTag label = LabelTag::Benign;

  std::uint64_t duration_ns() const { return end.ns() - start.ns(); }
};

struct FlowConfig {
  SimTime active_timeout = Seconds(1800);
  SimTime idle_timeout = Seconds(120);
};

struct FlowSet {
  std::vector<FlowRecord> flows;
  std::uint64_t ip_packets = 0;
  std::uint64_t non_ip_frames = 0;
  std::array<std::uint64_t, kLabelCount> arp_by_label{};
};

/// Streaming flow meter. Packets must be added in capture order.
class FlowExtractor {
 public:
  explicit FlowExtractor(FlowConfig config = {});

  void add(SimTime t, std::span<const std::uint8_t> frame, LabelTag label);
  void add_packet(SimTime t, const PacketInfo& p, LabelTag label);
  /// Closes every open flow and returns flows ordered by (start, flow_id).
  FlowSet finish();

 private:
  struct Accumulator {
    FlowRecord record;
    // Welford state per direction: mean/M2 for length and inter-arrival.
    struct Dir {
      double len_m2 = 0.0;
      double iat_m2 = 0.0;
      std::uint64_t iats = 0;
      SimTime last;
    } dir[2];
    SimTime last_seen;
    bool fin_seen[2] = {false, false};
    int first_fin = -1;
  };

  void close(std::size_t slot);

  FlowConfig config_;
  std::vector<Accumulator> open_;
  std::vector<std::size_t> free_slots_;
  std::unordered_map<FlowKey, std::size_t, FlowKeyHash> index_;
  FlowSet out_;
  std::uint64_t next_id_ = 1;
};

struct LabeledFrame {
  SimTime timestamp;
  Bytes bytes;
  LabelTag label = LabelTag::Benign;
};

FlowSet extract_flows(const std::vector<LabeledFrame>& frames, FlowConfig config = {});

/// BENIGN if every packet was benign; otherwise the most frequent malicious
/// label, ties going to the label seen first.
LabelTag flow_label(const FlowRecord& flow);
void label_flows(std::vector<FlowRecord>& flows);

inline constexpr const char* kFlowCsvHeader =
    "flow_id,src_ip,dst_ip,src_port,dst_port,protocol,start_ns,duration_ns,fwd_pkts,bwd_pkts,fwd_bytes,bwd_bytes,"
    "fwd_len_mean,fwd_len_std,fwd_len_min,fwd_len_max,bwd_len_mean,bwd_len_std,bwd_len_min,bwd_len_max,"
    "fwd_iat_mean,fwd_iat_std,bwd_iat_mean,bwd_iat_std,syn_cnt,ack_cnt,psh_cnt,fin_cnt,rst_cnt,label";

void emit_flow_csv(const std::vector<FlowRecord>& flows, const std::filesystem::path& path);
/// `label,count` per label for ARP frames.
void emit_arp_summary(const FlowSet& set, const std::filesystem::path& path);
/// flows.csv -> flows.arp.csv
std::filesystem::path arp_summary_path(const std::filesystem::path& flows_path);

}  // namespace rangesim
