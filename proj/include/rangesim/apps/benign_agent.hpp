#pragma once

#include <memory>
#include <string>

#include "rangesim/apps/app_log.hpp"
#include "rangesim/apps/services.hpp"
#include "rangesim/engine/rng.hpp"

namespace rangesim {

enum class BenignKind : std::uint8_t { HttpBrowser, FtpClient, SshClient, NtpClient, Ping };

const char* to_string(BenignKind kind);
std::optional<BenignKind> parse_benign_kind(std::string_view text);
AppKind app_kind(BenignKind kind);
/// Default mean inter-arrival per kind (HTTP 10 s, NTP 64 s, ping 30 s,
/// SSH 300 s, FTP 600 s).
SimTime default_mean_interval(BenignKind kind);

struct BenignAgentConfig {
  BenignKind kind = BenignKind::HttpBrowser;
  std::string host;
  std::string target;
  SimTime mean_interval;
  SimTime start;
  SimTime stop = SimTime::max();
};

class ServiceUnavailableTarget : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Poisson-arrival client: each wakeup starts one complete exchange on a
/// fresh connection and logs its outcome.
class BenignAgent {
 public:
  BenignAgent(Network& net, BenignAgentConfig config, Credentials creds, AppLog& log);

  void start();
  const BenignAgentConfig& config() const { return config_; }
  std::uint64_t wakeups() const { return wakeups_; }

  /// Wakeup instants the agent would produce, without a network.
  static std::vector<SimTime> sample_schedule(std::uint64_t seed, const BenignAgentConfig& config, SimTime horizon);
  static std::string stream_key(const BenignAgentConfig& config);

 private:
  void wake();
  void exchange();

  Network& net_;
  BenignAgentConfig config_;
  Credentials creds_;
  AppLog& log_;
  RngStream rng_;
  RngStream session_rng_;
  std::size_t host_ = 0;
  Ipv4Address target_ip_;
  std::uint16_t ping_id_ = 0;
  std::uint16_t ping_seq_ = 0;
  std::uint64_t wakeups_ = 0;
};

/// Validates the target and starts the agent; the returned object must
/// outlive the run.
std::unique_ptr<BenignAgent> run_benign_agent(Network& net, const BenignAgentConfig& config, const Credentials& creds,
                                              AppLog& log);

}  // namespace rangesim
