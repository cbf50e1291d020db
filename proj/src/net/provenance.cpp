#include "rangesim/net/provenance.hpp"

#include <array>

namespace rangesim {

namespace {
constexpr std::array<const char*, kLabelCount> kLabelNames{
    "BENIGN", "MITM_SCAN", "MITM_ARP", "DOS_PSHACK", "DOS_ICMPIGMP", "DOS_TCPKILL", "BF_SSH", "BF_FTP"};
}

const char* to_string(LabelTag label) { return kLabelNames[static_cast<std::size_t>(label)]; }

std::optional<LabelTag> parse_label(std::string_view text) {
  for (std::size_t i = 0; i < kLabelNames.size(); ++i) {
    if (text == kLabelNames[i]) return static_cast<LabelTag>(i);
  }
  return std::nullopt;
}

AgentId AgentRegistry::intern(std::string_view name) {
  auto it = index_.find(std::string(name));
  if (it != index_.end()) return AgentId{it->second};
  const auto id = static_cast<std::uint32_t>(names_.size());
  names_.emplace_back(name);
  index_.emplace(names_.back(), id);
  return AgentId{id};
}

}  // namespace rangesim
