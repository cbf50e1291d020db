#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rangesim/engine/sim_time.hpp"
#include "rangesim/proto/addresses.hpp"

namespace rangesim {

enum class AppKind : std::uint8_t { Http, Ftp, Ssh, Ntp, Ping };

const char* to_string(AppKind kind);

/// Outcome of one application exchange, as seen by the client.
struct ExchangeResult {
  bool success = false;
  /// Empty on success; otherwise e.g. "ServiceUnavailable", "Timeout",
  /// "Reset", "AuthFailed".
  std::string reason;
  std::uint64_t bytes_received = 0;
};

struct AppLogEntry {
  std::string agent;
  AppKind kind = AppKind::Http;
  Ipv4Address target;
  SimTime started;
  SimTime finished;
  ExchangeResult result;
};

struct AppStats {
  std::uint64_t attempts = 0;
  std::uint64_t successes = 0;
  double success_rate() const { return attempts == 0 ? 1.0 : static_cast<double>(successes) / attempts; }
};

class AppLog {
 public:
  void append(AppLogEntry entry) { entries_.push_back(std::move(entry)); }
  const std::vector<AppLogEntry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }

  /// Exchanges of `kind` started in [from, to).
  AppStats stats(AppKind kind, SimTime from = SimTime(), SimTime to = SimTime::max()) const;
  /// All kinds, optionally restricted to agents whose name is in `agents`.
  AppStats stats_all(SimTime from = SimTime(), SimTime to = SimTime::max(),
                     const std::vector<std::string>& agents = {}) const;

 private:
  std::vector<AppLogEntry> entries_;
};

}  // namespace rangesim
