#pragma once

// Ground-truth metadata that travels with each frame through the simulated
// network. It is never written into frame bytes.

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "rangesim/proto/wire.hpp"

namespace rangesim {

enum class LabelTag : std::uint8_t {
  Benign,
  MitmScan,
  MitmArp,
  DosPshAck,
  DosIcmpIgmp,
  DosTcpKill,
  BfSsh,
  BfFtp,
};

inline constexpr int kLabelCount = 8;

const char* to_string(LabelTag label);
std::optional<LabelTag> parse_label(std::string_view text);

struct AgentId {
  std::uint32_t value = 0;
  friend bool operator==(AgentId, AgentId) = default;
};

/// Interns agent names so frames carry a small id instead of a string.
class AgentRegistry {
 public:
  AgentId intern(std::string_view name);
  const std::string& name(AgentId id) const { return names_.at(id.value); }
  std::size_t size() const { return names_.size(); }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, std::uint32_t> index_;
};

struct Provenance {
  AgentId agent;
  LabelTag label = LabelTag::Benign;
  bool relayed = false;
};

/// A frame on the wire: immutable bytes shared by every copy (flooding,
/// SPAN), plus provenance.
struct WireFrame {
  std::shared_ptr<const Bytes> bytes;
  Provenance provenance;

  std::size_t size() const { return bytes ? bytes->size() : 0; }
};

inline WireFrame make_wire_frame(Bytes bytes, Provenance provenance) {
  return WireFrame{std::make_shared<const Bytes>(std::move(bytes)), provenance};
}

}  // namespace rangesim
