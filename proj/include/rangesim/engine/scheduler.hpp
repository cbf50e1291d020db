#pragma once

#include <cstdint>
#include <functional>
#include <queue>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

#include "rangesim/engine/sim_time.hpp"

namespace rangesim {

enum class EventKind : std::uint8_t { FrameDelivery, AgentWakeup, Timer };

const char* to_string(EventKind kind);

struct EventId {
  std::uint64_t sequence = 0;
  friend bool operator==(EventId, EventId) = default;
};

class PastEventError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class SameInstantOverflow : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TraceEntry {
  SimTime time;
  std::uint64_t sequence;
  EventKind kind;
  friend bool operator==(const TraceEntry&, const TraceEntry&) = default;
};

/// Discrete-event scheduler. Events fire in (fire_time, sequence) order;
/// sequence numbers are handed out in scheduling order, so same-instant
/// events run FIFO, including ones scheduled by a handler for "now".
class Scheduler {
 public:
  using Action = std::function<void()>;

  static constexpr std::uint64_t kDefaultSameInstantLimit = 1'000'000;

  Scheduler() = default;
  Scheduler(const Scheduler&) = delete;
  Scheduler& operator=(const Scheduler&) = delete;

  SimTime now() const { return now_; }

  EventId schedule(SimTime at, EventKind kind, Action action);
  EventId schedule_in(SimTime delay, EventKind kind, Action action) {
    return schedule(now_ + delay, kind, std::move(action));
  }

  /// Cancelled events are skipped without counting as processed. Only ids of
  /// still-pending events should be passed.
  void cancel(EventId id);

  /// Processes every event with fire_time <= end, then sets the clock to end.
  /// Returns the number of events processed.
  std::uint64_t run_until(SimTime end);

  /// Includes cancelled events that have not yet reached the queue head.
  std::size_t pending() const { return queue_.size(); }
  std::uint64_t processed() const { return processed_; }

  /// When enabled, every processed event is appended to trace().
  void enable_trace(bool on) { tracing_ = on; }
  const std::vector<TraceEntry>& trace() const { return trace_; }

  void set_same_instant_limit(std::uint64_t limit) { same_instant_limit_ = limit; }

 private:
  struct Entry {
    SimTime time;
    std::uint64_t sequence;
    EventKind kind;
    // mutable so the action can be moved out of the heap top before pop().
    mutable Action action;
  };
  struct Later {
    bool operator()(const Entry& a, const Entry& b) const {
      if (a.time != b.time) return a.time > b.time;
      return a.sequence > b.sequence;
    }
  };

  std::priority_queue<Entry, std::vector<Entry>, Later> queue_;
  std::unordered_set<std::uint64_t> cancelled_;
  SimTime now_{};
  std::uint64_t next_sequence_ = 0;
  std::uint64_t processed_ = 0;
  std::uint64_t same_instant_limit_ = kDefaultSameInstantLimit;
  bool tracing_ = false;
  std::vector<TraceEntry> trace_;
};

}  // namespace rangesim
