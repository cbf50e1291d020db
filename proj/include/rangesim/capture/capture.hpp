#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "rangesim/net/network.hpp"

namespace rangesim {

class NoSpanPort : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class IoFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CaptureRecord {
  std::uint64_t index = 0;
  SimTime timestamp;
  std::shared_ptr<const Bytes> bytes;
  Provenance provenance;
};

struct CaptureLimits {
  std::size_t max_records_in_memory = 1'000'000;
  std::size_t max_bytes_in_memory = std::size_t{256} << 20;
};

/// Append-only store of mirrored frames. Records beyond the in-memory
/// limits are spilled to a temporary file and streamed back on iteration.
class CaptureStore {
 public:
  explicit CaptureStore(CaptureLimits limits = {});
  ~CaptureStore();
  CaptureStore(const CaptureStore&) = delete;
  CaptureStore& operator=(const CaptureStore&) = delete;

  void append(SimTime t, const WireFrame& frame);
  std::uint64_t size() const { return count_; }
  bool spilled() const { return spilled_records_ > 0; }
  std::uint64_t spilled_records() const { return spilled_records_; }

  /// Visits every record in capture order.
  void for_each(const std::function<void(const CaptureRecord&)>& fn) const;

  /// Counts per label, in LabelTag order.
  std::array<std::uint64_t, kLabelCount> label_counts() const { return label_counts_; }

 private:
  void spill();

  CaptureLimits limits_;
  std::vector<CaptureRecord> memory_;
  std::size_t memory_bytes_ = 0;
  std::filesystem::path spill_path_;
  std::uint64_t spilled_records_ = 0;
  std::uint64_t count_ = 0;
  std::array<std::uint64_t, kLabelCount> label_counts_{};
};

/// Records every frame leaving the SPAN port of `lan`'s switch.
void attach_capture(Network& net, LanId lan, CaptureStore& store);

// ---------------------------------------------------------------- pcap

inline constexpr std::uint32_t kPcapMagic = 0xa1b2c3d4;
inline constexpr std::uint32_t kPcapSnaplen = 65535;
inline constexpr std::uint32_t kLinktypeEthernet = 1;

struct PcapRecord {
  std::uint32_t ts_sec = 0;
  std::uint32_t ts_usec = 0;
  Bytes bytes;
  SimTime timestamp() const { return SimTime(std::uint64_t{ts_sec} * 1'000'000'000ULL + std::uint64_t{ts_usec} * 1000); }
};

void write_pcap(const CaptureStore& store, const std::filesystem::path& path);
void write_pcap(const std::vector<PcapRecord>& records, const std::filesystem::path& path);
/// Throws IoFailure on unreadable or malformed files.
std::vector<PcapRecord> read_pcap(const std::filesystem::path& path);

// ---------------------------------------------------------------- labels

inline constexpr const char* kLabelsHeader = "frame_index,timestamp_ns,agent_id,label";

struct LabelRow {
  std::uint64_t frame_index = 0;
  std::uint64_t timestamp_ns = 0;
  std::string agent;
  LabelTag label = LabelTag::Benign;
};

void write_labels(const CaptureStore& store, const AgentRegistry& agents, const std::filesystem::path& path);
std::vector<LabelRow> read_labels(const std::filesystem::path& path);

}  // namespace rangesim
