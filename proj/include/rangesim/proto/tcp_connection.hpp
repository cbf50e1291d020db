#pragma once

#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "rangesim/engine/sim_time.hpp"
#include "rangesim/proto/wire.hpp"

namespace rangesim {

enum class TcpState : std::uint8_t {
  Closed,
  Listen,
  SynSent,
  SynReceived,
  Established,
  FinWait1,
  FinWait2,
  CloseWait,
  Closing,
  LastAck,
  TimeWait,
};

const char* to_string(TcpState state);
inline constexpr int kTcpStateCount = 11;

namespace tcp_cmd {
struct OpenActive {};
struct Listen {};
struct Send {
  Bytes data;
};
struct Close {};
struct Abort {};
struct RetransmitTimeout {};
struct TimeWaitTimeout {};
}  // namespace tcp_cmd

using TcpInput = std::variant<TcpSegment, tcp_cmd::OpenActive, tcp_cmd::Listen, tcp_cmd::Send, tcp_cmd::Close,
                              tcp_cmd::Abort, tcp_cmd::RetransmitTimeout, tcp_cmd::TimeWaitTimeout>;

enum class TcpNotice : std::uint8_t {
  Connected,    // handshake completed (either side)
  PeerClosed,   // in-order FIN received
  Closed,       // graceful teardown finished
  Reset,        // acceptable RST received
  Refused,      // RST in answer to our SYN
  TimedOut,     // handshake retransmission budget exhausted
  Aborted,      // local abort
};

const char* to_string(TcpNotice notice);

struct TcpTimerRequest {
  enum class Kind : std::uint8_t { Retransmit, TimeWait } kind = Kind::Retransmit;
  SimTime delay;
};

struct TcpStepResult {
  std::vector<TcpSegment> emitted;
  std::vector<TcpNotice> notices;
  Bytes delivered;
  /// Replaces any pending timer when set.
  std::optional<TcpTimerRequest> arm_timer;
  bool cancel_timer = false;
  /// Input made no sense in the current state and was ignored.
  bool rejected = false;
};

/// Connection state machine following the standard TCP state diagram, with
/// fixed window, no options, no data retransmission, and a bounded handshake
/// retransmission schedule. Pure: timers and I/O are the caller's job.
class TcpConnection {
 public:
  static constexpr int kHandshakeRetries = 2;
  static constexpr SimTime kInitialRto = Seconds(1);
  static constexpr SimTime kTimeWait = Seconds(2);

  TcpConnection(std::uint16_t local_port, std::uint16_t remote_port, std::uint32_t iss);

  TcpStepResult step(const TcpInput& input);

  TcpState state() const { return state_; }
  std::uint16_t local_port() const { return local_port_; }
  std::uint16_t remote_port() const { return remote_port_; }
  std::uint32_t iss() const { return iss_; }
  std::uint32_t snd_una() const { return snd_una_; }
  std::uint32_t snd_nxt() const { return snd_nxt_; }
  std::uint32_t rcv_nxt() const { return rcv_nxt_; }
  int retries() const { return retries_; }

  /// RST a closed or absent endpoint sends in answer to `seg` (none for RST).
  static std::optional<TcpSegment> reset_for(const TcpSegment& seg);

 private:
  TcpSegment make(std::uint8_t flags, std::uint32_t seq, Bytes payload = {}) const;
  void on_segment(const TcpSegment& seg, TcpStepResult& r);
  void on_segment_syn_sent(const TcpSegment& seg, TcpStepResult& r);
  bool acceptable(const TcpSegment& seg) const;
  void enter_closed(TcpStepResult& r, TcpNotice why);

  std::uint16_t local_port_;
  std::uint16_t remote_port_;
  TcpState state_ = TcpState::Closed;
  std::uint32_t iss_;
  std::uint32_t snd_una_;
  std::uint32_t snd_nxt_;
  std::uint32_t rcv_nxt_ = 0;
  int retries_ = 0;
  bool fin_sent_ = false;
};

/// Serial-number arithmetic (RFC 1982) on 32-bit sequence numbers.
constexpr bool seq_lt(std::uint32_t a, std::uint32_t b) { return static_cast<std::int32_t>(a - b) < 0; }
constexpr bool seq_le(std::uint32_t a, std::uint32_t b) { return static_cast<std::int32_t>(a - b) <= 0; }

}  // namespace rangesim
