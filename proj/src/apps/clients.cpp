#include <cstdio>
#include <sstream>

#include "rangesim/apps/http.hpp"
#include "rangesim/apps/ntp.hpp"
#include "rangesim/apps/services.hpp"
#include "session.hpp"

namespace rangesim {

using detail::LineBuffer;
using detail::Session;
using detail::to_bytes;

namespace {

constexpr SimTime kClientIdle = Seconds(20);

std::string reason_for(TcpNotice n) {
  switch (n) {
    case TcpNotice::TimedOut: return "ServiceUnavailable";
    case TcpNotice::Refused: return "ConnectionRefused";
    case TcpNotice::Reset: return "Reset";
    case TcpNotice::Aborted: return "Timeout";
    default: return "Closed";
  }
}

/// A client session that reports exactly once.
class ClientSession : public Session {
 public:
  ClientSession(const ClientContext& ctx, ExchangeDone done)
      : Session(*ctx.net, ctx.host), agent_(ctx.agent), done_(std::move(done)) {}

 protected:
  void report(bool ok, std::string reason = {}) {
    if (reported_) return;
    reported_ = true;
    ExchangeResult r;
    r.success = ok;
    r.reason = std::move(reason);
    r.bytes_received = bytes_;
    if (done_) done_(r);
  }
  void on_closed(TcpNotice n) {
    disarm();
    report(false, n == TcpNotice::Closed ? "Closed" : reason_for(n));
  }
  void on_timeout() override {
    if (sock_) stack().abort(*sock_);
    report(false, "Timeout");
  }

  AgentId agent_;
  ExchangeDone done_;
  std::optional<SocketId> sock_;
  std::uint64_t bytes_ = 0;
  bool reported_ = false;
};

// ---------------------------------------------------------------- HTTP

class HttpClient : public ClientSession {
 public:
  HttpClient(const ClientContext& ctx, Ipv4Address server, std::string path, ExchangeDone done)
      : ClientSession(ctx, std::move(done)), server_(server), path_(std::move(path)) {}

  void start() {
    auto s = self<HttpClient>();
    arm(kHttpTimeout);
    sock_ = stack().connect(server_, 80,
                            TcpHandlers{
                                [s] { s->stack().send(*s->sock_, http::format_request("GET", s->path_, s->server_.to_string())); },
                                [s](const Bytes& d) { s->on_data(d); },
                                [s] { s->stack().close(*s->sock_); },
                                [s](TcpNotice n) { s->on_closed(n); },
                            },
                            agent_);
  }

 private:
  void on_data(const Bytes& d) {
    bytes_ += d.size();
    buf_.append(d.begin(), d.end());
    if (!head_) head_ = http::parse_response(buf_);
    if (head_ && buf_.size() >= head_->header_bytes + head_->content_length) {
      if (head_->status == 200) {
        report(true);
      } else {
        report(false, "HTTP " + std::to_string(head_->status));
      }
    }
  }

  Ipv4Address server_;
  std::string path_;
  std::string buf_;
  std::optional<http::ResponseHead> head_;
};

// ---------------------------------------------------------------- FTP

class FtpClient : public ClientSession {
 public:
  FtpClient(const ClientContext& ctx, Ipv4Address server, Credentials creds, bool login_only, std::uint64_t seed,
            ExchangeDone done)
      : ClientSession(ctx, std::move(done)),
        server_(server),
        creds_(std::move(creds)),
        login_only_(login_only),
        retrieve_(seed & 1) {}

  void start() {
    auto s = self<FtpClient>();
    arm(kClientIdle);
    sock_ = stack().connect(server_, 21,
                            TcpHandlers{
                                nullptr,
                                [s](const Bytes& d) { s->on_control(d); },
                                [s] { s->stack().close(*s->sock_); },
                                [s](TcpNotice n) { s->on_control_closed(n); },
                            },
                            agent_);
  }

 private:
  enum class Step { Greeting, User, Pass, Syst, Pwd, Pasv, Transfer, Quit, Done };

  void on_control(const Bytes& d) {
    arm(kClientIdle);
    bytes_ += d.size();
    lines_.feed(d);
    while (auto line = lines_.next()) reply(*line);
  }

  void reply(const std::string& line) {
    const int code = line.size() >= 3 ? std::atoi(line.substr(0, 3).c_str()) : 0;
    switch (step_) {
      case Step::Greeting:
        if (code != 220) return fail("Protocol");
        command(Step::User, "USER " + creds_.user);
        break;
      case Step::User:
        if (code != 331) return fail("Protocol");
        command(Step::Pass, "PASS " + creds_.password);
        break;
      case Step::Pass:
        if (code == 530) {
          report(false, "AuthFailed");
          command(Step::Quit, "QUIT");
          return;
        }
        if (code != 230) return fail("Protocol");
        if (login_only_) {
          report(true);
          command(Step::Quit, "QUIT");
          return;
        }
        command(Step::Syst, "SYST");
        break;
      case Step::Syst:
        command(Step::Pwd, "PWD");
        break;
      case Step::Pwd:
        command(Step::Pasv, "PASV");
        break;
      case Step::Pasv:
        if (code != 227) return fail("Protocol");
        open_data(line);
        break;
      case Step::Transfer:
        if (code == 150) return;
        if (code != 226) return fail("Protocol");
        transfer_done_ = true;
        maybe_finish_transfer();
        break;
      case Step::Quit:
        if (code == 221) step_ = Step::Done;
        break;
      case Step::Done:
        break;
    }
  }

  void command(Step next, const std::string& line) {
    step_ = next;
    send_line(*sock_, line);
  }

  void fail(const std::string& why) {
    report(false, why);
    if (sock_) stack().abort(*sock_);
  }

  void open_data(const std::string& line) {
    const auto open = line.find('(');
    int h1, h2, h3, h4, p1, p2;
    if (open == std::string::npos ||
        std::sscanf(line.c_str() + open, "(%d,%d,%d,%d,%d,%d)", &h1, &h2, &h3, &h4, &p1, &p2) != 6) {
      return fail("Protocol");
    }
    const Ipv4Address ip(static_cast<std::uint8_t>(h1), static_cast<std::uint8_t>(h2), static_cast<std::uint8_t>(h3),
                         static_cast<std::uint8_t>(h4));
    const auto port = static_cast<std::uint16_t>((p1 << 8) | p2);
    auto s = self<FtpClient>();
    step_ = Step::Transfer;
    data_sock_ = stack().connect(ip, port,
                                 TcpHandlers{
                                     [s] { s->send_line(*s->sock_, s->retrieve_ ? "RETR report.pdf" : "LIST"); },
                                     [s](const Bytes& d) {
                                       s->arm(kClientIdle);
                                       s->bytes_ += d.size();
                                     },
                                     [s] {
                                       s->data_done_ = true;
                                       s->stack().close(*s->data_sock_);
                                       s->maybe_finish_transfer();
                                     },
                                     [s](TcpNotice n) {
                                       s->data_sock_.reset();
                                       if (!s->data_done_ && n != TcpNotice::Closed) s->fail(reason_for(n));
                                     },
                                 },
                                 agent_);
  }

  void maybe_finish_transfer() {
    if (!transfer_done_ || !data_done_ || step_ != Step::Transfer) return;
    report(true);
    command(Step::Quit, "QUIT");
  }

  void on_control_closed(TcpNotice n) {
    if (data_sock_) stack().abort(*data_sock_);
    on_closed(n);
  }

  Ipv4Address server_;
  Credentials creds_;
  bool login_only_;
  bool retrieve_;
  LineBuffer lines_;
  Step step_ = Step::Greeting;
  std::optional<SocketId> data_sock_;
  bool transfer_done_ = false;
  bool data_done_ = false;
};

// ---------------------------------------------------------------- SSH

class SshClient : public ClientSession {
 public:
  SshClient(const ClientContext& ctx, Ipv4Address server, Credentials creds, int commands, ExchangeDone done)
      : ClientSession(ctx, std::move(done)), server_(server), creds_(std::move(creds)), commands_left_(commands) {}

  void start() {
    auto s = self<SshClient>();
    arm(kClientIdle);
    sock_ = stack().connect(server_, 22,
                            TcpHandlers{
                                nullptr,
                                [s](const Bytes& d) { s->on_data(d); },
                                [s] { s->stack().close(*s->sock_); },
                                [s](TcpNotice n) { s->on_closed(n); },
                            },
                            agent_);
  }

 private:
  void on_data(const Bytes& d) {
    arm(kClientIdle);
    bytes_ += d.size();
    lines_.feed(d);
    while (auto line = lines_.next()) message(*line);
  }

  void message(const std::string& line) {
    if (line.rfind("SSH-", 0) == 0) {
      send_line(*sock_, "SSH-2.0-OpenSSH_9.2p1 Debian-2");
      std::ostringstream kex;
      kex << "KEXINIT " << std::hex << splitmix64_mix(fnv1a64(creds_.user) ^ now().ns())
          << " curve25519-sha256 ssh-ed25519 aes128-ctr";
      send_line(*sock_, kex.str());
    } else if (line.rfind("KEXINIT", 0) == 0) {
      send_line(*sock_, "NEWKEYS");
    } else if (line == "NEWKEYS") {
      send_line(*sock_, "USERAUTH password " + creds_.user + " " + ssh_auth_token(creds_));
    } else if (line == "USERAUTH_SUCCESS") {
      if (commands_left_ <= 0) {
        report(true);
        send_line(*sock_, "DISCONNECT by_application");
        stack().close(*sock_);
      } else {
        send_line(*sock_, "CHANNEL_OPEN session");
      }
    } else if (line.rfind("USERAUTH_FAILURE", 0) == 0) {
      report(false, "AuthFailed");
    } else if (line.rfind("CHANNEL_OPEN_CONFIRMATION", 0) == 0) {
      next_command();
    } else if (line.rfind("DATA", 0) == 0) {
      if (commands_left_ > 0) {
        auto w = std::weak_ptr<SshClient>(self<SshClient>());
        net_->scheduler().schedule_in(Seconds(2), EventKind::AgentWakeup, [w] {
          if (auto s = w.lock()) s->next_command();
        });
      } else {
        report(true);
        send_line(*sock_, "DISCONNECT by_application");
        stack().close(*sock_);
      }
    }
  }

  void next_command() {
    static constexpr const char* kCommands[] = {"uptime", "df -h", "ps aux", "tail /var/log/syslog", "who",
                                                "systemctl status nginx"};
    if (!stack().socket_state(*sock_)) return;
    const char* cmd = kCommands[static_cast<std::size_t>(commands_left_) % std::size(kCommands)];
    --commands_left_;
    send_line(*sock_, std::string("EXEC ") + cmd);
  }

  Ipv4Address server_;
  Credentials creds_;
  int commands_left_;
  LineBuffer lines_;
};

// ---------------------------------------------------------------- NTP

class NtpClient : public ClientSession {
 public:
  NtpClient(const ClientContext& ctx, Ipv4Address server, ExchangeDone done)
      : ClientSession(ctx, std::move(done)), server_(server) {}

  void start() {
    HostStack& h = stack();
    port_ = h.ephemeral_port();
    request_ = ntp::make_request(now());
    auto s = self<NtpClient>();
    h.bind_udp(port_, [s](const Ipv4Packet& p, const UdpDatagram& d) { s->on_reply(p, d); });
    arm(kNtpTimeout);
    h.send_udp(server_, port_, ntp::kPort, ntp::encode(request_), h.provenance(agent_));
  }

 private:
  void on_reply(const Ipv4Packet& p, const UdpDatagram& d) {
    auto reply = ntp::decode(d.payload);
    if (p.src != server_ || !reply || reply->mode != ntp::kModeServer ||
        reply->originate_ts != request_.transmit_ts) {
      return;
    }
    bytes_ = d.payload.size();
    finish(true);
  }
  void on_timeout() override { finish(false); }
  void finish(bool ok) {
    disarm();
    auto keep = self<NtpClient>();
    stack().unbind_udp(port_);
    report(ok, ok ? "" : "Timeout");
  }

  Ipv4Address server_;
  std::uint16_t port_ = 0;
  ntp::Packet request_;
};

// ---------------------------------------------------------------- ping

class PingClient : public ClientSession {
 public:
  PingClient(const ClientContext& ctx, Ipv4Address target, std::uint16_t id, std::uint16_t seq, ExchangeDone done)
      : ClientSession(ctx, std::move(done)), target_(target), id_(id), seq_(seq) {}

  void start() {
    HostStack& h = stack();
    auto s = self<PingClient>();
    h.on_echo_reply(id_, [s](const Ipv4Packet& p, const IcmpMessage& m) {
      if (p.src == s->target_ && m.seq == s->seq_) {
        s->bytes_ = m.payload.size();
        s->finish(true);
      }
    });
    arm(kPingTimeout);
    Bytes payload(56);
    for (std::size_t i = 0; i < payload.size(); ++i) payload[i] = static_cast<std::uint8_t>(0x10 + i);
    h.send_echo(target_, id_, seq_, std::move(payload), h.provenance(agent_));
  }

 private:
  void on_timeout() override { finish(false); }
  void finish(bool ok) {
    disarm();
    auto keep = self<PingClient>();
    stack().on_echo_reply(id_, nullptr);
    report(ok, ok ? "" : "Timeout");
  }

  Ipv4Address target_;
  std::uint16_t id_;
  std::uint16_t seq_;
};

}  // namespace

void http_get(const ClientContext& ctx, Ipv4Address server, std::string path, ExchangeDone done) {
  std::make_shared<HttpClient>(ctx, server, std::move(path), std::move(done))->start();
}

void ftp_session(const ClientContext& ctx, Ipv4Address server, Credentials creds, bool login_only,
                 std::uint64_t session_seed, ExchangeDone done) {
  std::make_shared<FtpClient>(ctx, server, std::move(creds), login_only, session_seed, std::move(done))->start();
}

void ssh_session(const ClientContext& ctx, Ipv4Address server, Credentials creds, int commands, ExchangeDone done) {
  std::make_shared<SshClient>(ctx, server, std::move(creds), commands, std::move(done))->start();
}

void ntp_query(const ClientContext& ctx, Ipv4Address server, ExchangeDone done) {
  std::make_shared<NtpClient>(ctx, server, std::move(done))->start();
}

void ping_once(const ClientContext& ctx, Ipv4Address target, std::uint16_t id, std::uint16_t seq, ExchangeDone done) {
  std::make_shared<PingClient>(ctx, target, id, seq, std::move(done))->start();
}

}  // namespace rangesim
