#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <queue>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "dccsim/sim_time.hpp"

namespace dccsim {

enum class EventKind : std::uint8_t {
  TriggerEvaluation,
  GateOpen,
  Delivery,
  GotWakeup,
  MobilityStep,
  CbrWindow,
  TrafficArrival,
};

std::string_view to_string(EventKind kind);

inline constexpr std::uint32_t kNoVehicle = 0xFFFFFFFFu;

/// Identifies a scheduled event; valid() is false for a default-constructed handle.
struct EventHandle {
  std::uint64_t seq = 0;
  constexpr bool valid() const { return seq != 0; }
  constexpr bool operator==(const EventHandle&) const = default;
};

/// Deterministic discrete-event scheduler. Events are totally ordered by
/// (fire_at, insertion sequence); equal timestamps fire in insertion order.
class Scheduler {
public:
  using Handler = std::function<void()>;

  Scheduler() = default;
  Scheduler(const Scheduler&) = delete;
  Scheduler& operator=(const Scheduler&) = delete;

  SimTime now() const { return now_; }

  /// Throws std::logic_error when fire_at lies in the past.
  EventHandle schedule(SimTime fire_at, EventKind kind, std::uint32_t vehicle, Handler handler);

  /// Returns false when the handle is invalid or the event already fired or was cancelled.
  bool cancel(EventHandle handle);

  bool is_pending(EventHandle handle) const;

  /// Processes every event with fire_at <= t_end, then advances the clock to t_end.
  std::uint64_t run_until(SimTime t_end);

  std::size_t pending_count() const { return live_.size(); }
  std::uint64_t processed_count() const { return processed_; }

  /// One line per processed event: "<time_us> <vehicle|-> <kind>".
  void set_trace(std::ostream* sink) { trace_ = sink; }

private:
  struct Entry {
    SimTime fire_at;
    std::uint64_t seq;
    EventKind kind;
    std::uint32_t vehicle;
    Handler handler;
  };
  struct Later {
    bool operator()(const Entry& a, const Entry& b) const {
      if (a.fire_at != b.fire_at) return a.fire_at > b.fire_at;
      return a.seq > b.seq;
    }
  };

  std::priority_queue<Entry, std::vector<Entry>, Later> queue_;
  std::unordered_set<std::uint64_t> live_;
  SimTime now_ = SimTime::zero();
  std::uint64_t next_seq_ = 1;
  std::uint64_t processed_ = 0;
  std::ostream* trace_ = nullptr;
};

}  // namespace dccsim
