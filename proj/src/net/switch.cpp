#include "rangesim/net/switch.hpp"

#include <stdexcept>

namespace rangesim {

LearningSwitch::LearningSwitch(std::size_t port_count, std::optional<std::size_t> span_port)
    : port_count_(port_count), span_port_(span_port) {
  if (span_port_ && *span_port_ >= port_count_) throw std::out_of_range("SPAN port beyond port count");
}

std::optional<std::size_t> LearningSwitch::lookup(const MacAddress& mac) const {
  if (auto it = table_.find(mac); it != table_.end()) return it->second;
  return std::nullopt;
}

std::vector<SwitchDelivery> LearningSwitch::forward(std::size_t ingress, std::span<const std::uint8_t> frame) {
  std::vector<SwitchDelivery> out;
  if (ingress >= port_count_ || frame.size() < 14) return out;
  if (span_port_ && ingress == *span_port_) return out;

  MacAddress dst, src;
  for (int i = 0; i < 6; ++i) {
    dst.octets[i] = frame[i];
    src.octets[i] = frame[6 + i];
  }
  if (!src.is_multicast()) table_[src] = ingress;

  const auto known = dst.is_multicast() ? std::nullopt : lookup(dst);
  if (known) {
    if (*known == ingress) {
      ++filtered_;
      return out;
    }
    out.push_back({*known, false});
    ++forwarded_;
  } else {
    for (std::size_t p = 0; p < port_count_; ++p) {
      if (p == ingress || (span_port_ && p == *span_port_)) continue;
      out.push_back({p, false});
    }
    ++flooded_;
  }
  if (span_port_) {
    out.push_back({*span_port_, true});
    ++span_copies_;
  }
  return out;
}

}  // namespace rangesim
