#include "rangesim/apps/benign_agent.hpp"

#include "rangesim/apps/http.hpp"

namespace rangesim {

const char* to_string(BenignKind kind) {
  switch (kind) {
    case BenignKind::HttpBrowser: return "http";
    case BenignKind::FtpClient: return "ftp";
    case BenignKind::SshClient: return "ssh";
    case BenignKind::NtpClient: return "ntp";
    case BenignKind::Ping: return "ping";
  }
  return "?";
}

std::optional<BenignKind> parse_benign_kind(std::string_view text) {
  for (auto k : {BenignKind::HttpBrowser, BenignKind::FtpClient, BenignKind::SshClient, BenignKind::NtpClient,
                 BenignKind::Ping}) {
    if (text == to_string(k)) return k;
  }
  return std::nullopt;
}

AppKind app_kind(BenignKind kind) {
  switch (kind) {
    case BenignKind::HttpBrowser: return AppKind::Http;
    case BenignKind::FtpClient: return AppKind::Ftp;
    case BenignKind::SshClient: return AppKind::Ssh;
    case BenignKind::NtpClient: return AppKind::Ntp;
    case BenignKind::Ping: return AppKind::Ping;
  }
  return AppKind::Http;
}

SimTime default_mean_interval(BenignKind kind) {
  switch (kind) {
    case BenignKind::HttpBrowser: return Seconds(10);
    case BenignKind::FtpClient: return Seconds(600);
    case BenignKind::SshClient: return Seconds(300);
    case BenignKind::NtpClient: return Seconds(64);
    case BenignKind::Ping: return Seconds(30);
  }
  return Seconds(10);
}

std::string BenignAgent::stream_key(const BenignAgentConfig& config) {
  return "benign/" + config.host + "/" + to_string(config.kind) + "/" + config.target;
}

std::vector<SimTime> BenignAgent::sample_schedule(std::uint64_t seed, const BenignAgentConfig& config,
                                                  SimTime horizon) {
  RngStream rng(seed, stream_key(config));
  std::vector<SimTime> out;
  SimTime t = config.start;
  const SimTime end = std::min(horizon, config.stop);
  while (true) {
    t = t + rng.exponential(config.mean_interval);
    if (t >= end) break;
    out.push_back(t);
  }
  return out;
}

BenignAgent::BenignAgent(Network& net, BenignAgentConfig config, Credentials creds, AppLog& log)
    : net_(net),
      config_(std::move(config)),
      creds_(std::move(creds)),
      log_(log),
      rng_(net.seed(), stream_key(config_)),
      session_rng_(net.seed(), stream_key(config_) + "/session") {
  if (config_.mean_interval.ns() == 0) throw std::invalid_argument("mean inter-arrival must be > 0");
  const Topology& topo = net.topology();
  host_ = topo.host_index(config_.host);
  const std::size_t target = topo.host_index(config_.target);
  const HostSpec& t = topo.hosts[target];
  target_ip_ = t.primary().ip;
  bool offered = true;
  switch (config_.kind) {
    case BenignKind::HttpBrowser: offered = t.offers(80, Transport::Tcp); break;
    case BenignKind::FtpClient: offered = t.offers(21, Transport::Tcp); break;
    case BenignKind::SshClient: offered = t.offers(22, Transport::Tcp); break;
    case BenignKind::NtpClient: offered = t.offers(123, Transport::Udp); break;
    case BenignKind::Ping: break;
  }
  if (!offered) {
    throw ServiceUnavailableTarget(config_.target + " does not offer " + to_string(config_.kind));
  }
  ping_id_ = static_cast<std::uint16_t>(session_rng_.fork("ping-id").next_u64() & 0xFF00);
}

void BenignAgent::start() {
  const SimTime first = std::max(config_.start, net_.now()) + rng_.exponential(config_.mean_interval);
  if (first >= config_.stop) return;
  net_.scheduler().schedule(first, EventKind::AgentWakeup, [this] { wake(); });
}

void BenignAgent::wake() {
  ++wakeups_;
  exchange();
  const SimTime next = net_.now() + rng_.exponential(config_.mean_interval);
  if (next >= config_.stop) return;
  net_.scheduler().schedule(next, EventKind::AgentWakeup, [this] { wake(); });
}

void BenignAgent::exchange() {
  HostStack& h = net_.host(host_);
  const ClientContext ctx{&net_, host_, h.agent()};
  auto entry = std::make_shared<AppLogEntry>();
  entry->agent = config_.host;
  entry->kind = app_kind(config_.kind);
  entry->target = target_ip_;
  entry->started = net_.now();
  AppLog* log = &log_;
  Network* net = &net_;
  auto done = [log, net, entry](const ExchangeResult& r) {
    entry->finished = net->now();
    entry->result = r;
    log->append(*entry);
  };
  switch (config_.kind) {
    case BenignKind::HttpBrowser: {
      const auto& cat = http::catalog();
      http_get(ctx, target_ip_, cat[session_rng_.uniform(cat.size())], done);
      break;
    }
    case BenignKind::FtpClient:
      ftp_session(ctx, target_ip_, creds_, false, session_rng_.next_u64(), done);
      break;
    case BenignKind::SshClient:
      ssh_session(ctx, target_ip_, creds_, static_cast<int>(session_rng_.uniform_range(2, 8)), done);
      break;
    case BenignKind::NtpClient:
      ntp_query(ctx, target_ip_, done);
      break;
    case BenignKind::Ping:
      ++ping_seq_;
      ping_once(ctx, target_ip_, static_cast<std::uint16_t>(ping_id_ | (ping_seq_ & 0xFF)), ping_seq_, done);
      break;
  }
}

std::unique_ptr<BenignAgent> run_benign_agent(Network& net, const BenignAgentConfig& config, const Credentials& creds,
                                              AppLog& log) {
  auto agent = std::make_unique<BenignAgent>(net, config, creds, log);
  agent->start();
  return agent;
}

}  // namespace rangesim
