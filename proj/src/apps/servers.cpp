#include <algorithm>
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

constexpr SimTime kServerIdle = Seconds(60);

struct FtpFile {
  const char* name;
  std::size_t size;
};

constexpr FtpFile kFtpFiles[] = {
    {"backup.tar.gz", 24576}, {"inventory.csv", 6144}, {"notes.txt", 1200}, {"report.pdf", 16384}};

Bytes ftp_file_bytes(const FtpFile& f) {
  RngStream rng(0, std::string("ftp-file:") + f.name);
  Bytes b(f.size);
  for (auto& x : b) x = static_cast<std::uint8_t>(rng.next_u64());
  return b;
}

Bytes ftp_listing() {
  std::string out;
  for (const auto& f : kFtpFiles) {
    out += "-rw-r--r--    1 1001     1001     " + std::to_string(f.size) + " Jan 10 09:00 " + f.name + "\r\n";
  }
  return to_bytes(out);
}

// ---------------------------------------------------------------- HTTP

class HttpServerSession : public Session {
 public:
  HttpServerSession(Network& net, std::size_t host, SocketId sock, std::shared_ptr<ServerStats> stats)
      : Session(net, host), sock_(sock), stats_(std::move(stats)) {}

  TcpHandlers handlers() {
    auto s = self<HttpServerSession>();
    arm(kServerIdle);
    return TcpHandlers{
        nullptr,
        [s](const Bytes& d) { s->on_data(d); },
        [s] { s->stack().close(s->sock_); },
        [s](TcpNotice) { s->disarm(); },
    };
  }

 private:
  void on_data(const Bytes& d) {
    if (responded_) return;
    buf_.append(d.begin(), d.end());
    auto req = http::parse_request(buf_);
    if (!req) return;
    responded_ = true;
    ++stats_->http_requests;
    if (req->method == "GET" && http::in_catalog(req->path)) {
      stack().send(sock_, http::format_response(200, http::body_for(req->path)));
    } else {
      ++stats_->http_not_found;
      static const Bytes kNotFound = to_bytes("<html><body>404 Not Found</body></html>\n");
      stack().send(sock_, http::format_response(404, kNotFound));
    }
    stack().close(sock_);
  }
  void on_timeout() override { stack().abort(sock_); }

  SocketId sock_;
  std::shared_ptr<ServerStats> stats_;
  std::string buf_;
  bool responded_ = false;
};

// ---------------------------------------------------------------- FTP

class FtpServerSession : public Session {
 public:
  FtpServerSession(Network& net, std::size_t host, SocketId sock, Credentials creds,
                   std::shared_ptr<ServerStats> stats, std::uint32_t* next_port)
      : Session(net, host), sock_(sock), creds_(std::move(creds)), stats_(std::move(stats)), next_port_(next_port) {}

  TcpHandlers handlers() {
    auto s = self<FtpServerSession>();
    arm(kServerIdle);
    return TcpHandlers{
        [s] { s->send_line(s->sock_, "220 (vsFTPd 3.0.5)"); },
        [s](const Bytes& d) { s->on_data(d); },
        [s] { s->stack().close(s->sock_); },
        [s](TcpNotice) { s->on_control_closed(); },
    };
  }

 private:
  void on_data(const Bytes& d) {
    arm(kServerIdle);
    lines_.feed(d);
    while (auto line = lines_.next()) {
      if (closing_) return;
      command(*line);
    }
  }

  void command(const std::string& line) {
    const auto sp = line.find(' ');
    std::string verb = line.substr(0, sp);
    std::transform(verb.begin(), verb.end(), verb.begin(), [](unsigned char c) { return std::toupper(c); });
    const std::string arg = sp == std::string::npos ? "" : line.substr(sp + 1);

    if (verb == "USER") {
      user_ = arg;
      logged_in_ = false;
      send_line(sock_, "331 Please specify the password.");
    } else if (verb == "PASS") {
      if (!user_) {
        send_line(sock_, "503 Login with USER first.");
      } else if (*user_ == creds_.user && arg == creds_.password) {
        logged_in_ = true;
        ++stats_->ftp_logins;
        send_line(sock_, "230 Login successful.");
      } else {
        ++stats_->ftp_login_failures;
        user_.reset();
        send_line(sock_, "530 Login incorrect.");
      }
    } else if (verb == "QUIT") {
      send_line(sock_, "221 Goodbye.");
      closing_ = true;
      stack().close(sock_);
    } else if (!logged_in_) {
      send_line(sock_, "530 Please login with USER and PASS.");
    } else if (verb == "SYST") {
      send_line(sock_, "215 UNIX Type: L8");
    } else if (verb == "PWD") {
      send_line(sock_, "257 \"/\" is the current directory");
    } else if (verb == "TYPE") {
      send_line(sock_, "200 Switching to Binary mode.");
    } else if (verb == "PASV") {
      passive();
    } else if (verb == "LIST" || verb == "RETR") {
      transfer(verb, arg);
    } else {
      send_line(sock_, "500 Unknown command.");
    }
  }

  void passive() {
    drop_data();
    HostStack& h = stack();
    std::uint16_t port = 0;
    for (int i = 0; i < 10000 && port == 0; ++i) {
      const auto candidate = static_cast<std::uint16_t>(40000 + (*next_port_)++ % 10000);
      std::weak_ptr<FtpServerSession> w = self<FtpServerSession>();
      ListenerConfig cfg;
      cfg.half_open_limit = 1;
      cfg.established_limit = 1;
      cfg.agent = h.agent();
      if (h.listen(candidate, cfg, [w, candidate](SocketId id) { return accept_data(w, candidate, id); })) {
        port = candidate;
      }
    }
    data_port_ = port;
    const Ipv4Address ip = h.spec().primary().ip;
    std::ostringstream reply;
    reply << "227 Entering Passive Mode (" << int(ip.octet(0)) << ',' << int(ip.octet(1)) << ',' << int(ip.octet(2))
          << ',' << int(ip.octet(3)) << ',' << (port >> 8) << ',' << (port & 0xFF) << ").";
    send_line(sock_, reply.str());
  }

  static TcpHandlers accept_data(const std::weak_ptr<FtpServerSession>& w, std::uint16_t port, SocketId id) {
    auto s = w.lock();
    if (!s) return {};
    s->stack().unlisten(port);
    s->data_port_.reset();
    s->data_sock_ = id;
    return TcpHandlers{
        [s] {
          s->data_ready_ = true;
          s->run_pending();
        },
        nullptr,
        [s] {
          if (s->data_sock_) s->stack().close(*s->data_sock_);
        },
        [s](TcpNotice) {
          s->data_sock_.reset();
          s->data_ready_ = false;
        },
    };
  }

  void transfer(const std::string& verb, const std::string& arg) {
    if (!data_sock_ && !data_port_) {
      send_line(sock_, "425 Use PORT or PASV first.");
      return;
    }
    if (verb == "RETR") {
      const auto* f = std::find_if(std::begin(kFtpFiles), std::end(kFtpFiles),
                                   [&](const FtpFile& x) { return arg == x.name; });
      if (f == std::end(kFtpFiles)) {
        send_line(sock_, "550 Failed to open file.");
        return;
      }
      pending_ = Pending{"150 Opening BINARY mode data connection for " + arg + " (" + std::to_string(f->size) +
                             " bytes).",
                         ftp_file_bytes(*f)};
    } else {
      pending_ = Pending{"150 Here comes the directory listing.", ftp_listing()};
    }
    run_pending();
  }

  void run_pending() {
    if (!pending_ || !data_ready_ || !data_sock_) return;
    Pending p = std::move(*pending_);
    pending_.reset();
    send_line(sock_, p.preliminary);
    stack().send(*data_sock_, std::move(p.data));
    stack().close(*data_sock_);
    ++stats_->ftp_transfers;
    send_line(sock_, "226 Transfer complete.");
  }

  void drop_data() {
    if (data_port_) stack().unlisten(*data_port_);
    data_port_.reset();
    if (data_sock_) stack().abort(*data_sock_);
  }

  void on_control_closed() {
    disarm();
    drop_data();
  }

  void on_timeout() override {
    drop_data();
    stack().abort(sock_);
  }

  struct Pending {
    std::string preliminary;
    Bytes data;
  };

  SocketId sock_;
  Credentials creds_;
  std::shared_ptr<ServerStats> stats_;
  std::uint32_t* next_port_;
  LineBuffer lines_;
  std::optional<std::string> user_;
  bool logged_in_ = false;
  bool closing_ = false;
  std::optional<std::uint16_t> data_port_;
  std::optional<SocketId> data_sock_;
  bool data_ready_ = false;
  std::optional<Pending> pending_;
};

// ---------------------------------------------------------------- SSH

class SshServerSession : public Session {
 public:
  SshServerSession(Network& net, std::size_t host, SocketId sock, Credentials creds,
                   std::shared_ptr<ServerStats> stats)
      : Session(net, host), sock_(sock), creds_(std::move(creds)), stats_(std::move(stats)) {}

  TcpHandlers handlers() {
    auto s = self<SshServerSession>();
    arm(kServerIdle);
    return TcpHandlers{
        [s] {
          const bool windows = s->stack().spec().os == OsTag::Windows10;
          s->send_line(s->sock_, windows ? "SSH-2.0-OpenSSH_for_Windows_8.1" : "SSH-2.0-OpenSSH_8.9p1 Ubuntu-3ubuntu0.4");
        },
        [s](const Bytes& d) { s->on_data(d); },
        [s] { s->stack().close(s->sock_); },
        [s](TcpNotice) { s->disarm(); },
    };
  }

 private:
  void on_data(const Bytes& d) {
    arm(kServerIdle);
    lines_.feed(d);
    while (auto line = lines_.next()) {
      if (closing_) return;
      message(*line);
    }
  }

  void message(const std::string& line) {
    std::istringstream in(line);
    std::string verb;
    in >> verb;
    if (line.rfind("SSH-", 0) == 0) {
      return;
    } else if (verb == "KEXINIT") {
      const std::uint64_t cookie = splitmix64_mix(fnv1a64(line) ^ now().ns());
      std::ostringstream reply;
      reply << "KEXINIT " << std::hex << cookie;
      send_line(sock_, reply.str());
    } else if (verb == "NEWKEYS") {
      send_line(sock_, "NEWKEYS");
    } else if (verb == "USERAUTH") {
      std::string method, user, token;
      in >> method >> user >> token;
      if (method == "password" && user == creds_.user && token == ssh_auth_token(creds_)) {
        ++stats_->ssh_logins;
        authed_ = true;
        send_line(sock_, "USERAUTH_SUCCESS");
      } else {
        ++stats_->ssh_login_failures;
        send_line(sock_, "USERAUTH_FAILURE password");
        closing_ = true;
        stack().close(sock_);
      }
    } else if (!authed_) {
      send_line(sock_, "DISCONNECT protocol_error");
      closing_ = true;
      stack().close(sock_);
    } else if (verb == "CHANNEL_OPEN") {
      send_line(sock_, "CHANNEL_OPEN_CONFIRMATION 0");
    } else if (verb == "EXEC") {
      std::string cmd;
      std::getline(in >> std::ws, cmd);
      const std::uint64_t h = fnv1a64(cmd);
      std::ostringstream reply;
      reply << "DATA " << cmd << ": ok " << std::hex << h << std::string(32 + h % 200, '.');
      send_line(sock_, reply.str());
    } else if (verb == "DISCONNECT") {
      closing_ = true;
      stack().close(sock_);
    }
  }

  void on_timeout() override { stack().abort(sock_); }

  SocketId sock_;
  Credentials creds_;
  std::shared_ptr<ServerStats> stats_;
  LineBuffer lines_;
  bool authed_ = false;
  bool closing_ = false;
};

}  // namespace

std::string ssh_auth_token(const Credentials& creds) {
  std::ostringstream out;
  out << std::hex << splitmix64_mix(fnv1a64(creds.user + ":" + creds.password));
  return out.str();
}

ServiceSuite::ServiceSuite(Network& net, std::map<std::string, Credentials> credentials)
    : net_(net), credentials_(std::move(credentials)) {}

std::map<std::string, Credentials> ServiceSuite::default_credentials() {
  return {
      {"ftp-server", {"ftpadmin", "Shop#Files2023"}},
      {"admin-win", {"administrator", "W1nAdm!n#22"}},
      {"admin-ubuntu", {"sysadmin", "Ubuntu$Adm1n"}},
  };
}

const Credentials& ServiceSuite::credentials_for(std::string_view host) const {
  auto it = credentials_.find(std::string(host));
  if (it == credentials_.end()) throw std::out_of_range("no credentials for host '" + std::string(host) + "'");
  return it->second;
}

void ServiceSuite::install() {
  const Topology& topo = net_.topology();
  for (std::size_t i = 0; i < topo.hosts.size(); ++i) {
    for (const Service& s : topo.hosts[i].services) {
      switch (s.kind) {
        case ServiceKind::Http: install_http(i); break;
        case ServiceKind::Ftp: install_ftp(i); break;
        case ServiceKind::Ssh: install_ssh(i); break;
        case ServiceKind::Ntp: install_ntp(i); break;
      }
    }
  }
}

void ServiceSuite::install_http(std::size_t host) {
  HostStack& h = net_.host(host);
  ListenerConfig cfg;
  cfg.agent = h.agent();
  Network* net = &net_;
  auto stats = stats_;
  h.listen(80, cfg, [net, host, stats](SocketId id) {
    return std::make_shared<HttpServerSession>(*net, host, id, stats)->handlers();
  });
}

void ServiceSuite::install_ftp(std::size_t host) {
  HostStack& h = net_.host(host);
  ListenerConfig cfg;
  cfg.agent = h.agent();
  Network* net = &net_;
  auto stats = stats_;
  auto creds = credentials_for(h.spec().name);
  std::uint32_t* next_port = &next_data_port_;
  h.listen(21, cfg, [net, host, stats, creds, next_port](SocketId id) {
    return std::make_shared<FtpServerSession>(*net, host, id, creds, stats, next_port)->handlers();
  });
}

void ServiceSuite::install_ssh(std::size_t host) {
  HostStack& h = net_.host(host);
  ListenerConfig cfg;
  cfg.agent = h.agent();
  Network* net = &net_;
  auto stats = stats_;
  auto creds = credentials_for(h.spec().name);
  h.listen(22, cfg, [net, host, stats, creds](SocketId id) {
    return std::make_shared<SshServerSession>(*net, host, id, creds, stats)->handlers();
  });
}

void ServiceSuite::install_ntp(std::size_t host) {
  HostStack& h = net_.host(host);
  Network* net = &net_;
  auto stats = stats_;
  h.bind_udp(ntp::kPort, [net, host, stats](const Ipv4Packet& p, const UdpDatagram& d) {
    auto req = ntp::decode(d.payload);
    if (!req || req->mode != ntp::kModeClient) return;
    HostStack& self = net->host(host);
    ++stats->ntp_responses;
    self.send_udp(p.src, ntp::kPort, d.src_port, ntp::encode(ntp::make_response(*req, net->now())),
                  self.provenance());
  });
}

}  // namespace rangesim
