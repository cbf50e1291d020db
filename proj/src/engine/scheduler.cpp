#include "rangesim/engine/scheduler.hpp"

namespace rangesim {

const char* to_string(EventKind kind) {
  switch (kind) {
    case EventKind::FrameDelivery: return "frame-delivery";
    case EventKind::AgentWakeup: return "agent-wakeup";
    case EventKind::Timer: return "timer";
  }
  return "?";
}

EventId Scheduler::schedule(SimTime at, EventKind kind, Action action) {
  if (at < now_) {
    throw PastEventError("cannot schedule at " + std::to_string(at.ns()) + "ns, clock is at " +
                         std::to_string(now_.ns()) + "ns");
  }
  const std::uint64_t seq = next_sequence_++;
  queue_.push(Entry{at, seq, kind, std::move(action)});
  return EventId{seq};
}

void Scheduler::cancel(EventId id) {
  if (id.sequence < next_sequence_) cancelled_.insert(id.sequence);
}

std::uint64_t Scheduler::run_until(SimTime end) {
  std::uint64_t count = 0;
  SimTime instant = now_;
  std::uint64_t at_instant = 0;

  while (!queue_.empty() && queue_.top().time <= end) {
    const Entry& top = queue_.top();
    const SimTime time = top.time;
    const std::uint64_t seq = top.sequence;
    const EventKind kind = top.kind;
    Action action = std::move(top.action);
    queue_.pop();

    if (auto it = cancelled_.find(seq); it != cancelled_.end()) {
      cancelled_.erase(it);
      continue;
    }

    if (time != instant) {
      instant = time;
      at_instant = 0;
    }
    if (++at_instant > same_instant_limit_) {
      throw SameInstantOverflow("more than " + std::to_string(same_instant_limit_) + " events fired at t=" +
                                std::to_string(time.ns()) + "ns; likely a zero-delay scheduling loop");
    }

    now_ = time;
    if (tracing_) trace_.push_back(TraceEntry{time, seq, kind});
    ++count;
    ++processed_;
    if (action) action();
  }
  if (end > now_) now_ = end;
  return count;
}

}  // namespace rangesim
