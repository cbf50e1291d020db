#pragma once

// Service-LAN servers and the client sessions that talk to them. Clients
// are reused by the brute-force attacker with arbitrary credentials.

#include <functional>
#include <map>
#include <string>
#include <string_view>

#include "rangesim/apps/app_log.hpp"
#include "rangesim/net/network.hpp"

namespace rangesim {

struct Credentials {
  std::string user;
  std::string password;
  friend bool operator==(const Credentials&, const Credentials&) = default;
};

/// Opaque stand-in for an SSH password-auth blob.
std::string ssh_auth_token(const Credentials& creds);

inline constexpr SimTime kHttpTimeout = Seconds(20);
inline constexpr SimTime kSessionTimeout = Seconds(60);
inline constexpr SimTime kNtpTimeout = Seconds(5);
inline constexpr SimTime kPingTimeout = Seconds(2);

struct ServerStats {
  std::uint64_t http_requests = 0;
  std::uint64_t http_not_found = 0;
  std::uint64_t ftp_logins = 0;
  std::uint64_t ftp_login_failures = 0;
  std::uint64_t ftp_transfers = 0;
  std::uint64_t ssh_logins = 0;
  std::uint64_t ssh_login_failures = 0;
  std::uint64_t ntp_responses = 0;
};

/// Installs every service listed in each host's HostSpec. `credentials` maps
/// a host name to its one valid login (SSH and FTP hosts).
class ServiceSuite {
 public:
  ServiceSuite(Network& net, std::map<std::string, Credentials> credentials);
  ServiceSuite(const ServiceSuite&) = delete;
  ServiceSuite& operator=(const ServiceSuite&) = delete;

  void install();
  const ServerStats& stats() const { return *stats_; }
  const Credentials& credentials_for(std::string_view host) const;

  static std::map<std::string, Credentials> default_credentials();

 private:
  void install_http(std::size_t host);
  void install_ftp(std::size_t host);
  void install_ssh(std::size_t host);
  void install_ntp(std::size_t host);

  Network& net_;
  std::map<std::string, Credentials> credentials_;
  std::shared_ptr<ServerStats> stats_ = std::make_shared<ServerStats>();
  std::uint32_t next_data_port_ = 0;
};

using ExchangeDone = std::function<void(const ExchangeResult&)>;

struct ClientContext {
  Network* net = nullptr;
  std::size_t host = 0;
  AgentId agent;
};

/// One GET on a fresh connection; succeeds once the full body arrives.
void http_get(const ClientContext& ctx, Ipv4Address server, std::string path, ExchangeDone done);

/// Control session: login, SYST, PWD, then one passive LIST or RETR, QUIT.
/// With `login_only`, the session stops after the PASS reply (success on 230).
void ftp_session(const ClientContext& ctx, Ipv4Address server, Credentials creds, bool login_only,
                 std::uint64_t session_seed, ExchangeDone done);

/// Banner, key-exchange markers, password auth. On success, runs
/// `commands` interactive commands two seconds apart before disconnecting.
void ssh_session(const ClientContext& ctx, Ipv4Address server, Credentials creds, int commands, ExchangeDone done);

void ntp_query(const ClientContext& ctx, Ipv4Address server, ExchangeDone done);

void ping_once(const ClientContext& ctx, Ipv4Address target, std::uint16_t id, std::uint16_t seq, ExchangeDone done);

}  // namespace rangesim
