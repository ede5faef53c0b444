#include "dccsim/scheduler.hpp"

#include <ostream>
#include <stdexcept>
#include <string>

namespace dccsim {

std::string_view to_string(EventKind kind) {
  switch (kind) {
    case EventKind::TriggerEvaluation: return "trigger-evaluation";
    case EventKind::GateOpen: return "gate-open";
    case EventKind::Delivery: return "delivery";
    case EventKind::GotWakeup: return "got-wakeup";
    case EventKind::MobilityStep: return "mobility-step";
    case EventKind::CbrWindow: return "cbr-window";
    case EventKind::TrafficArrival: return "traffic-arrival";
  }
  return "unknown";
}

EventHandle Scheduler::schedule(SimTime fire_at, EventKind kind, std::uint32_t vehicle, Handler handler) {
  if (fire_at < now_) {
    throw std::logic_error("event scheduled in the past: fire_at=" + std::to_string(fire_at.us()) +
                           "us now=" + std::to_string(now_.us()) + "us");
  }
  const std::uint64_t seq = next_seq_++;
  queue_.push(Entry{fire_at, seq, kind, vehicle, std::move(handler)});
  live_.insert(seq);
  return EventHandle{seq};
}

bool Scheduler::cancel(EventHandle handle) {
  return handle.valid() && live_.erase(handle.seq) > 0;
}

bool Scheduler::is_pending(EventHandle handle) const {
  return handle.valid() && live_.contains(handle.seq);
}

std::uint64_t Scheduler::run_until(SimTime t_end) {
  if (t_end < now_) throw std::logic_error("run_until target lies in the past");
  std::uint64_t count = 0;
  while (!queue_.empty() && queue_.top().fire_at <= t_end) {
    // priority_queue::top is const; the entry is discarded right after, so moving is safe.
    Entry entry = std::move(const_cast<Entry&>(queue_.top()));
    queue_.pop();
    if (live_.erase(entry.seq) == 0) continue;  // cancelled
    now_ = entry.fire_at;
    if (trace_ != nullptr) {
      *trace_ << now_.us() << ' ';
      if (entry.vehicle == kNoVehicle) {
        *trace_ << '-';
      } else {
        *trace_ << entry.vehicle;
      }
      *trace_ << ' ' << to_string(entry.kind) << '\n';
    }
    entry.handler();
    ++count;
    ++processed_;
  }
  now_ = t_end;
  return count;
}

}  // namespace dccsim
