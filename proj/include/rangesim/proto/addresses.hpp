#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>

namespace rangesim {

struct MacAddress {
  std::array<std::uint8_t, 6> octets{};

  static constexpr MacAddress broadcast() { return MacAddress{{0xff, 0xff, 0xff, 0xff, 0xff, 0xff}}; }
  static constexpr MacAddress zero() { return MacAddress{}; }

  /// 02:xx:... locally administered unicast derived from a 32-bit index.
  static constexpr MacAddress local(std::uint32_t index) {
    return MacAddress{{0x02, 0x52, static_cast<std::uint8_t>(index >> 24), static_cast<std::uint8_t>(index >> 16),
                       static_cast<std::uint8_t>(index >> 8), static_cast<std::uint8_t>(index)}};
  }

  constexpr bool is_broadcast() const { return *this == broadcast(); }
  constexpr bool is_multicast() const { return (octets[0] & 0x01) != 0; }
  constexpr bool is_locally_administered() const { return (octets[0] & 0x02) != 0; }

  std::string to_string() const;
  static MacAddress parse(std::string_view text);

  constexpr auto operator<=>(const MacAddress&) const = default;
};

/// IPv4 address held in host byte order.
struct Ipv4Address {
  std::uint32_t value = 0;

  constexpr Ipv4Address() = default;
  constexpr explicit Ipv4Address(std::uint32_t v) : value(v) {}
  constexpr Ipv4Address(std::uint8_t a, std::uint8_t b, std::uint8_t c, std::uint8_t d)
      : value((std::uint32_t{a} << 24) | (std::uint32_t{b} << 16) | (std::uint32_t{c} << 8) | d) {}

  constexpr std::uint8_t octet(int i) const { return static_cast<std::uint8_t>(value >> (24 - 8 * i)); }
  constexpr bool is_multicast() const { return (value >> 28) == 0xE; }

  std::string to_string() const;
  static Ipv4Address parse(std::string_view text);

  constexpr auto operator<=>(const Ipv4Address&) const = default;
};

struct Cidr {
  Ipv4Address network;
  std::uint8_t prefix = 0;

  constexpr std::uint32_t mask() const { return prefix == 0 ? 0 : ~std::uint32_t{0} << (32 - prefix); }
  constexpr bool contains(Ipv4Address ip) const { return (ip.value & mask()) == (network.value & mask()); }
  constexpr Ipv4Address broadcast_address() const { return Ipv4Address(network.value | ~mask()); }
  constexpr Ipv4Address host(std::uint32_t offset) const { return Ipv4Address((network.value & mask()) + offset); }
  /// Usable host count (excludes network and broadcast for prefixes < 31).
  constexpr std::uint32_t host_count() const {
    if (prefix >= 31) return prefix == 32 ? 1 : 2;
    return (std::uint32_t{1} << (32 - prefix)) - 2;
  }

  std::string to_string() const;
  /// "a.b.c.d/n"; throws std::invalid_argument.
  static Cidr parse(std::string_view text);

  constexpr auto operator<=>(const Cidr&) const = default;
};

}  // namespace rangesim

template <>
struct std::hash<rangesim::Ipv4Address> {
  std::size_t operator()(rangesim::Ipv4Address a) const noexcept { return std::hash<std::uint32_t>{}(a.value); }
};

template <>
struct std::hash<rangesim::MacAddress> {
  std::size_t operator()(const rangesim::MacAddress& m) const noexcept {
    std::uint64_t v = 0;
    for (auto o : m.octets) v = (v << 8) | o;
    return std::hash<std::uint64_t>{}(v);
  }
};
