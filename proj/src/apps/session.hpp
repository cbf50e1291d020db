#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rangesim/net/network.hpp"

namespace rangesim::detail {

/// Splits a byte stream into CRLF-terminated lines.
class LineBuffer {
 public:
  void feed(const Bytes& data) { buf_.append(data.begin(), data.end()); }
  std::optional<std::string> next() {
    const auto pos = buf_.find("\r\n");
    if (pos == std::string::npos) return std::nullopt;
    std::string line = buf_.substr(0, pos);
    buf_.erase(0, pos + 2);
    return line;
  }

 private:
  std::string buf_;
};

inline Bytes to_bytes(std::string_view s) { return Bytes(s.begin(), s.end()); }

/// Shared plumbing for application sessions: owning network, host, and a
/// single rearmable watchdog timer.
class Session : public std::enable_shared_from_this<Session> {
 public:
  Session(Network& net, std::size_t host) : net_(&net), host_(host) {}
  virtual ~Session() = default;

 protected:
  HostStack& stack() { return net_->host(host_); }
  SimTime now() const { return net_->now(); }

  void arm(SimTime delay) {
    disarm();
    timer_ = net_->scheduler().schedule_in(delay, EventKind::Timer, [w = weak_from_this()] {
      if (auto s = w.lock()) {
        s->timer_.reset();
        s->on_timeout();
      }
    });
  }
  void disarm() {
    if (timer_) net_->scheduler().cancel(*timer_);
    timer_.reset();
  }
  void send_line(SocketId sock, std::string_view line) {
    Bytes b = to_bytes(line);
    b.push_back('\r');
    b.push_back('\n');
    stack().send(sock, std::move(b));
  }

  virtual void on_timeout() = 0;

  template <class T>
  std::shared_ptr<T> self() {
    return std::static_pointer_cast<T>(shared_from_this());
  }

  Network* net_;
  std::size_t host_;
  std::optional<EventId> timer_;
};

}  // namespace rangesim::detail
