#include "rangesim/proto/addresses.hpp"

#include <charconv>
#include <cstdio>
#include <stdexcept>

namespace rangesim {

std::string MacAddress::to_string() const {
  char buf[18];
  std::snprintf(buf, sizeof buf, "%02x:%02x:%02x:%02x:%02x:%02x", octets[0], octets[1], octets[2], octets[3],
                octets[4], octets[5]);
  return buf;
}

MacAddress MacAddress::parse(std::string_view text) {
  MacAddress mac;
  if (text.size() != 17) throw std::invalid_argument("bad MAC address '" + std::string(text) + "'");
  for (int i = 0; i < 6; ++i) {
    const char* first = text.data() + i * 3;
    unsigned v = 0;
    auto [ptr, ec] = std::from_chars(first, first + 2, v, 16);
    if (ec != std::errc{} || ptr != first + 2 || (i < 5 && text[i * 3 + 2] != ':')) {
      throw std::invalid_argument("bad MAC address '" + std::string(text) + "'");
    }
    mac.octets[i] = static_cast<std::uint8_t>(v);
  }
  return mac;
}

std::string Ipv4Address::to_string() const {
  return std::to_string(octet(0)) + "." + std::to_string(octet(1)) + "." + std::to_string(octet(2)) + "." +
         std::to_string(octet(3));
}

Ipv4Address Ipv4Address::parse(std::string_view text) {
  std::uint32_t value = 0;
  const char* p = text.data();
  const char* end = text.data() + text.size();
  for (int i = 0; i < 4; ++i) {
    unsigned part = 0;
    auto [next, ec] = std::from_chars(p, end, part);
    if (ec != std::errc{} || next == p || part > 255) {
      throw std::invalid_argument("bad IPv4 address '" + std::string(text) + "'");
    }
    value = (value << 8) | part;
    p = next;
    if (i < 3) {
      if (p == end || *p != '.') throw std::invalid_argument("bad IPv4 address '" + std::string(text) + "'");
      ++p;
    }
  }
  if (p != end) throw std::invalid_argument("bad IPv4 address '" + std::string(text) + "'");
  return Ipv4Address(value);
}

std::string Cidr::to_string() const { return network.to_string() + "/" + std::to_string(prefix); }

Cidr Cidr::parse(std::string_view text) {
  const auto slash = text.find('/');
  if (slash == std::string_view::npos) throw std::invalid_argument("CIDR needs a prefix: '" + std::string(text) + "'");
  Cidr c;
  c.network = Ipv4Address::parse(text.substr(0, slash));
  unsigned prefix = 0;
  const auto rest = text.substr(slash + 1);
  auto [ptr, ec] = std::from_chars(rest.data(), rest.data() + rest.size(), prefix);
  if (ec != std::errc{} || ptr != rest.data() + rest.size() || prefix > 32) {
    throw std::invalid_argument("bad CIDR prefix in '" + std::string(text) + "'");
  }
  c.prefix = static_cast<std::uint8_t>(prefix);
  c.network = Ipv4Address(c.network.value & c.mask());
  return c;
}

}  // namespace rangesim
