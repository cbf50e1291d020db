#include "rangesim/proto/tcp_connection.hpp"

namespace rangesim {

using namespace tcp_flag;

const char* to_string(TcpState s) {
  switch (s) {
    case TcpState::Closed: return "CLOSED";
    case TcpState::Listen: return "LISTEN";
    case TcpState::SynSent: return "SYN_SENT";
    case TcpState::SynReceived: return "SYN_RECEIVED";
    case TcpState::Established: return "ESTABLISHED";
    case TcpState::FinWait1: return "FIN_WAIT_1";
    case TcpState::FinWait2: return "FIN_WAIT_2";
    case TcpState::CloseWait: return "CLOSE_WAIT";
    case TcpState::Closing: return "CLOSING";
    case TcpState::LastAck: return "LAST_ACK";
    case TcpState::TimeWait: return "TIME_WAIT";
  }
  return "?";
}

const char* to_string(TcpNotice n) {
  switch (n) {
    case TcpNotice::Connected: return "connected";
    case TcpNotice::PeerClosed: return "peer-closed";
    case TcpNotice::Closed: return "closed";
    case TcpNotice::Reset: return "reset";
    case TcpNotice::Refused: return "refused";
    case TcpNotice::TimedOut: return "timed-out";
    case TcpNotice::Aborted: return "aborted";
  }
  return "?";
}

TcpConnection::TcpConnection(std::uint16_t local_port, std::uint16_t remote_port, std::uint32_t iss)
    : local_port_(local_port), remote_port_(remote_port), iss_(iss), snd_una_(iss), snd_nxt_(iss) {}

TcpSegment TcpConnection::make(std::uint8_t flags, std::uint32_t seq, Bytes payload) const {
  TcpSegment s;
  s.src_port = local_port_;
  s.dst_port = remote_port_;
  s.seq = seq;
  s.flags = flags;
  if (flags & kAck) s.ack = rcv_nxt_;
  s.payload = std::move(payload);
  return s;
}

std::optional<TcpSegment> TcpConnection::reset_for(const TcpSegment& seg) {
  if (seg.flags & kRst) return std::nullopt;
  TcpSegment r;
  r.src_port = seg.dst_port;
  r.dst_port = seg.src_port;
  r.window = 0;
  if (seg.flags & kAck) {
    r.seq = seg.ack;
    r.flags = kRst;
  } else {
    r.seq = 0;
    r.ack = seg.seq + seg.seq_len();
    r.flags = kRst | kAck;
  }
  return r;
}

void TcpConnection::enter_closed(TcpStepResult& r, TcpNotice why) {
  state_ = TcpState::Closed;
  r.cancel_timer = true;
  r.arm_timer.reset();
  r.notices.push_back(why);
}

bool TcpConnection::acceptable(const TcpSegment& seg) const {
  const std::uint32_t len = seg.seq_len();
  const std::uint32_t wnd_end = rcv_nxt_ + kTcpWindow;
  if (len == 0) return seg.seq == rcv_nxt_ || (seq_le(rcv_nxt_, seg.seq) && seq_lt(seg.seq, wnd_end));
  const std::uint32_t last = seg.seq + len - 1;
  return (seq_le(rcv_nxt_, seg.seq) && seq_lt(seg.seq, wnd_end)) ||
         (seq_le(rcv_nxt_, last) && seq_lt(last, wnd_end));
}

TcpStepResult TcpConnection::step(const TcpInput& input) {
  TcpStepResult r;
  std::visit(
      [&](const auto& in) {
        using T = std::decay_t<decltype(in)>;
        if constexpr (std::is_same_v<T, TcpSegment>) {
          on_segment(in, r);
        } else if constexpr (std::is_same_v<T, tcp_cmd::OpenActive>) {
          if (state_ != TcpState::Closed) {
            r.rejected = true;
            return;
          }
          r.emitted.push_back(make(kSyn, iss_));
          snd_una_ = iss_;
          snd_nxt_ = iss_ + 1;
          retries_ = 0;
          state_ = TcpState::SynSent;
          r.arm_timer = TcpTimerRequest{TcpTimerRequest::Kind::Retransmit, kInitialRto};
        } else if constexpr (std::is_same_v<T, tcp_cmd::Listen>) {
          if (state_ != TcpState::Closed) {
            r.rejected = true;
            return;
          }
          state_ = TcpState::Listen;
        } else if constexpr (std::is_same_v<T, tcp_cmd::Send>) {
          if (state_ != TcpState::Established && state_ != TcpState::CloseWait) {
            r.rejected = true;
            return;
          }
          std::size_t off = 0;
          while (off < in.data.size()) {
            const std::size_t n = std::min(kTcpMss, in.data.size() - off);
            const bool last = off + n == in.data.size();
            Bytes chunk(in.data.begin() + static_cast<std::ptrdiff_t>(off),
                        in.data.begin() + static_cast<std::ptrdiff_t>(off + n));
            r.emitted.push_back(make(last ? (kPsh | kAck) : kAck, snd_nxt_, std::move(chunk)));
            snd_nxt_ += static_cast<std::uint32_t>(n);
            off += n;
          }
        } else if constexpr (std::is_same_v<T, tcp_cmd::Close>) {
          switch (state_) {
            case TcpState::Established:
            case TcpState::SynReceived:
              r.emitted.push_back(make(kFin | kAck, snd_nxt_));
              ++snd_nxt_;
              fin_sent_ = true;
              state_ = TcpState::FinWait1;
              r.cancel_timer = true;
              break;
            case TcpState::CloseWait:
              r.emitted.push_back(make(kFin | kAck, snd_nxt_));
              ++snd_nxt_;
              fin_sent_ = true;
              state_ = TcpState::LastAck;
              break;
            case TcpState::Listen:
            case TcpState::SynSent:
              enter_closed(r, TcpNotice::Closed);
              break;
            default:
              r.rejected = true;
          }
        } else if constexpr (std::is_same_v<T, tcp_cmd::Abort>) {
          switch (state_) {
            case TcpState::Closed:
              r.rejected = true;
              break;
            case TcpState::Listen:
            case TcpState::SynSent:
            case TcpState::TimeWait:
              enter_closed(r, TcpNotice::Aborted);
              break;
            default:
              r.emitted.push_back(make(kRst, snd_nxt_));
              enter_closed(r, TcpNotice::Aborted);
          }
        } else if constexpr (std::is_same_v<T, tcp_cmd::RetransmitTimeout>) {
          if (state_ != TcpState::SynSent && state_ != TcpState::SynReceived) {
            r.rejected = true;
            return;
          }
          if (retries_ >= kHandshakeRetries) {
            enter_closed(r, TcpNotice::TimedOut);
            return;
          }
          ++retries_;
          if (state_ == TcpState::SynSent) {
            r.emitted.push_back(make(kSyn, iss_));
          } else {
            r.emitted.push_back(make(kSyn | kAck, iss_));
          }
          r.arm_timer = TcpTimerRequest{TcpTimerRequest::Kind::Retransmit, kInitialRto * (1ULL << retries_)};
        } else if constexpr (std::is_same_v<T, tcp_cmd::TimeWaitTimeout>) {
          if (state_ != TcpState::TimeWait) {
            r.rejected = true;
            return;
          }
          enter_closed(r, TcpNotice::Closed);
        }
      },
      input);
  return r;
}

void TcpConnection::on_segment_syn_sent(const TcpSegment& seg, TcpStepResult& r) {
  const bool has_ack = seg.flags & kAck;
  if (has_ack && seg.ack != snd_nxt_) {
    if (!(seg.flags & kRst)) {
      if (auto rst = reset_for(seg)) r.emitted.push_back(*rst);
    }
    return;
  }
  if (seg.flags & kRst) {
    if (has_ack) enter_closed(r, TcpNotice::Refused);
    return;
  }
  if (!(seg.flags & kSyn)) return;
  rcv_nxt_ = seg.seq + 1;
  if (has_ack) {
    snd_una_ = seg.ack;
    state_ = TcpState::Established;
    r.cancel_timer = true;
    r.emitted.push_back(make(kAck, snd_nxt_));
    r.notices.push_back(TcpNotice::Connected);
  } else {
    // Simultaneous open.
    state_ = TcpState::SynReceived;
    r.emitted.push_back(make(kSyn | kAck, iss_));
  }
}

void TcpConnection::on_segment(const TcpSegment& seg, TcpStepResult& r) {
  switch (state_) {
    case TcpState::Closed:
      if (auto rst = reset_for(seg)) r.emitted.push_back(*rst);
      return;
    case TcpState::Listen:
      if (seg.flags & kRst) return;
      if (seg.flags & kAck) {
        if (auto rst = reset_for(seg)) r.emitted.push_back(*rst);
        return;
      }
      if (!(seg.flags & kSyn)) return;
      rcv_nxt_ = seg.seq + 1;
      snd_una_ = iss_;
      snd_nxt_ = iss_ + 1;
      retries_ = 0;
      state_ = TcpState::SynReceived;
      r.emitted.push_back(make(kSyn | kAck, iss_));
      r.arm_timer = TcpTimerRequest{TcpTimerRequest::Kind::Retransmit, kInitialRto};
      return;
    case TcpState::SynSent:
      on_segment_syn_sent(seg, r);
      return;
    default:
      break;
  }

  // Synchronized states (and SYN_RECEIVED).
  if (!acceptable(seg)) {
    if (!(seg.flags & kRst)) r.emitted.push_back(make(kAck, snd_nxt_));
    return;
  }
  if (seg.flags & kRst) {
    enter_closed(r, TcpNotice::Reset);
    return;
  }
  if (seg.flags & kSyn) {
    // Challenge ACK for an in-window SYN.
    r.emitted.push_back(make(kAck, snd_nxt_));
    return;
  }
  if (!(seg.flags & kAck)) return;

  if (state_ == TcpState::SynReceived) {
    if (seg.ack != snd_nxt_) {
      if (auto rst = reset_for(seg)) r.emitted.push_back(*rst);
      return;
    }
    snd_una_ = seg.ack;
    state_ = TcpState::Established;
    r.cancel_timer = true;
    r.notices.push_back(TcpNotice::Connected);
  } else if (seq_lt(snd_una_, seg.ack) && seq_le(seg.ack, snd_nxt_)) {
    snd_una_ = seg.ack;
  }

  const bool fin_acked = fin_sent_ && snd_una_ == snd_nxt_;
  switch (state_) {
    case TcpState::FinWait1:
      if (fin_acked) state_ = TcpState::FinWait2;
      break;
    case TcpState::Closing:
      if (fin_acked) {
        state_ = TcpState::TimeWait;
        r.arm_timer = TcpTimerRequest{TcpTimerRequest::Kind::TimeWait, kTimeWait};
      }
      return;
    case TcpState::LastAck:
      if (fin_acked) enter_closed(r, TcpNotice::Closed);
      return;
    case TcpState::TimeWait:
      if (seg.flags & kFin) r.emitted.push_back(make(kAck, snd_nxt_));
      return;
    default:
      break;
  }

  bool need_ack = false;
  bool in_order = seg.seq == rcv_nxt_;
  const bool receiving = state_ == TcpState::Established || state_ == TcpState::FinWait1 ||
                         state_ == TcpState::FinWait2;
  if (!seg.payload.empty()) {
    need_ack = true;
    if (receiving && in_order) {
      r.delivered.insert(r.delivered.end(), seg.payload.begin(), seg.payload.end());
      rcv_nxt_ += static_cast<std::uint32_t>(seg.payload.size());
    } else {
      in_order = false;
    }
  }

  if ((seg.flags & kFin) && in_order && receiving) {
    ++rcv_nxt_;
    need_ack = true;
    r.notices.push_back(TcpNotice::PeerClosed);
    switch (state_) {
      case TcpState::Established:
        state_ = TcpState::CloseWait;
        break;
      case TcpState::FinWait1:
        state_ = TcpState::Closing;
        break;
      case TcpState::FinWait2:
        state_ = TcpState::TimeWait;
        r.arm_timer = TcpTimerRequest{TcpTimerRequest::Kind::TimeWait, kTimeWait};
        break;
      default:
        break;
    }
  }
  if (need_ack) r.emitted.push_back(make(kAck, snd_nxt_));
}

}  // namespace rangesim
