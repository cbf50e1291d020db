#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "rangesim/proto/addresses.hpp"

namespace rangesim {

struct SwitchDelivery {
  std::size_t port = 0;
  bool span = false;
  friend bool operator==(const SwitchDelivery&, const SwitchDelivery&) = default;
};

/// Transparent learning bridge with an optional egress-only SPAN port.
/// Every frame the switch forwards or floods is also copied once to the SPAN
/// port; frames entering on the SPAN port are dropped without learning.
class LearningSwitch {
 public:
  LearningSwitch(std::size_t port_count, std::optional<std::size_t> span_port);

  /// Returns the egress list for a frame; the SPAN copy, if any, is last.
  std::vector<SwitchDelivery> forward(std::size_t ingress_port, std::span<const std::uint8_t> frame);

  std::optional<std::size_t> lookup(const MacAddress& mac) const;
  std::size_t port_count() const { return port_count_; }
  std::optional<std::size_t> span_port() const { return span_port_; }
  void set_span_port(std::optional<std::size_t> port) { span_port_ = port; }

  std::uint64_t forwarded_frames() const { return forwarded_; }
  std::uint64_t flooded_frames() const { return flooded_; }
  std::uint64_t filtered_frames() const { return filtered_; }
  std::uint64_t span_copies() const { return span_copies_; }

 private:
  std::size_t port_count_;
  std::optional<std::size_t> span_port_;
  std::unordered_map<MacAddress, std::size_t> table_;
  std::uint64_t forwarded_ = 0;
  std::uint64_t flooded_ = 0;
  std::uint64_t filtered_ = 0;
  std::uint64_t span_copies_ = 0;
};

}  // namespace rangesim
