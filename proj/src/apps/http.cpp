#include "rangesim/apps/http.hpp"

#include <algorithm>
#include <charconv>

#include "rangesim/engine/rng.hpp"

namespace rangesim::http {

namespace {

constexpr std::string_view kHeaderEnd = "\r\n\r\n";

const char* reason_phrase(int status) {
  switch (status) {
    case 200: return "OK";
    case 404: return "Not Found";
    default: return "Unknown";
  }
}

void append(Bytes& out, std::string_view text) { out.insert(out.end(), text.begin(), text.end()); }

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

}  // namespace

const std::vector<std::string>& catalog() {
  static const std::vector<std::string> paths = [] {
    std::vector<std::string> p{"/", "/products"};
    for (std::size_t i = 1; i <= kCatalogProducts; ++i) p.push_back("/products/" + std::to_string(i));
    p.emplace_back("/cart");
    p.emplace_back("/checkout");
    return p;
  }();
  return paths;
}

bool in_catalog(std::string_view path) {
  const auto& c = catalog();
  return std::find(c.begin(), c.end(), path) != c.end();
}

Bytes body_for(std::string_view path) {
  RngStream rng(0, "http-body:" + std::string(path));
  const std::size_t len = rng.uniform_range(kMinBody, kMaxBody);
  static constexpr std::string_view kAlphabet = "abcdefghijklmnopqrstuvwxyz0123456789 <>/=\"\n";
  Bytes body;
  body.reserve(len);
  for (std::size_t i = 0; i < len; ++i) body.push_back(static_cast<std::uint8_t>(kAlphabet[rng.uniform(kAlphabet.size())]));
  return body;
}

Bytes format_request(std::string_view method, std::string_view path, std::string_view host) {
  Bytes out;
  append(out, method);
  append(out, " ");
  append(out, path);
  append(out, " HTTP/1.1\r\nHost: ");
  append(out, host);
  append(out, "\r\nUser-Agent: Mozilla/5.0 (rangesim)\r\nAccept: */*\r\nConnection: close\r\n\r\n");
  return out;
}

Bytes format_response(int status, const Bytes& body) {
  Bytes out;
  append(out, "HTTP/1.1 " + std::to_string(status) + " " + reason_phrase(status) + "\r\n");
  append(out, "Server: nginx/1.18.0 (Ubuntu)\r\nContent-Type: text/html\r\n");
  append(out, "Content-Length: " + std::to_string(body.size()) + "\r\nConnection: close\r\n\r\n");
  out.insert(out.end(), body.begin(), body.end());
  return out;
}

std::optional<RequestHead> parse_request(std::string_view buffer) {
  const auto end = buffer.find(kHeaderEnd);
  if (end == std::string_view::npos) return std::nullopt;
  const auto line_end = buffer.find("\r\n");
  const std::string_view line = buffer.substr(0, line_end);
  const auto sp1 = line.find(' ');
  const auto sp2 = line.find(' ', sp1 == std::string_view::npos ? sp1 : sp1 + 1);
  if (sp1 == std::string_view::npos || sp2 == std::string_view::npos) return RequestHead{};
  return RequestHead{std::string(line.substr(0, sp1)), std::string(line.substr(sp1 + 1, sp2 - sp1 - 1))};
}

std::optional<ResponseHead> parse_response(std::string_view buffer) {
  const auto end = buffer.find(kHeaderEnd);
  if (end == std::string_view::npos) return std::nullopt;
  ResponseHead head;
  head.header_bytes = end + kHeaderEnd.size();
  const std::string_view block = buffer.substr(0, end);
  const auto sp = block.find(' ');
  if (sp == std::string_view::npos || block.size() < sp + 4) return head;
  std::from_chars(block.data() + sp + 1, block.data() + sp + 4, head.status);
  std::size_t pos = block.find("\r\n");
  while (pos != std::string_view::npos && pos < block.size()) {
    const std::size_t next = block.find("\r\n", pos + 2);
    const std::string_view line = block.substr(pos + 2, next == std::string_view::npos ? next : next - pos - 2);
    const auto colon = line.find(':');
    if (colon != std::string_view::npos && lower(line.substr(0, colon)) == "content-length") {
      std::string_view value = line.substr(colon + 1);
      while (!value.empty() && value.front() == ' ') value.remove_prefix(1);
      std::from_chars(value.data(), value.data() + value.size(), head.content_length);
    }
    pos = next;
  }
  return head;
}

}  // namespace rangesim::http
