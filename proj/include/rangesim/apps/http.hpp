#pragma once

// Minimal HTTP/1.1 message handling for the simulated e-commerce store.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rangesim/proto/wire.hpp"

namespace rangesim::http {

inline constexpr std::size_t kCatalogProducts = 50;
inline constexpr std::size_t kMinBody = 512;
inline constexpr std::size_t kMaxBody = 8192;

/// "/", "/products", "/products/1".."/products/50", "/cart", "/checkout".
const std::vector<std::string>& catalog();
bool in_catalog(std::string_view path);

/// Deterministic page body for a catalog path, 512..8192 bytes.
Bytes body_for(std::string_view path);

Bytes format_request(std::string_view method, std::string_view path, std::string_view host);
Bytes format_response(int status, const Bytes& body);

struct RequestHead {
  std::string method;
  std::string path;
};

struct ResponseHead {
  int status = 0;
  std::size_t content_length = 0;
  std::size_t header_bytes = 0;
};

/// Parses once the full header block ("\r\n\r\n") is present in `buffer`.
std::optional<RequestHead> parse_request(std::string_view buffer);
std::optional<ResponseHead> parse_response(std::string_view buffer);

}  // namespace rangesim::http
