#include "dccsim/dcc_access.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace dccsim::dcc {

std::string_view to_string(TrafficClass tc) {
  switch (tc) {
    case TrafficClass::TC0: return "TC0";
    case TrafficClass::TC1: return "TC1";
    case TrafficClass::TC2: return "TC2";
    case TrafficClass::TC3: return "TC3";
  }
  return "TC?";
}

SimTime QueuedMessage::gen_timestamp() const {
  return is_cam() ? cam().gen_timestamp : std::get<GenericMessage>(payload).created;
}

QueuedMessage make_cam(const ca::CamMessage& cam, SimTime now) {
  return QueuedMessage{cam, now, TrafficClass::TC2, cam.size};
}

QueuedMessage make_generic(std::uint32_t sender, TrafficClass tc, std::uint32_t size, SimTime now) {
  return QueuedMessage{GenericMessage{sender, now}, now, tc, size};
}

namespace {

void check_gate_interval(Duration t_dcc) {
  if (t_dcc < kMinGateInterval || t_dcc > kMaxGateInterval) {
    throw std::invalid_argument("gate interval outside [25 ms, 1000 ms]: " +
                                std::to_string(t_dcc.count()) + " us");
  }
}

}  // namespace

ConstantRate::ConstantRate(Duration t_dcc) : value_{t_dcc} { check_gate_interval(t_dcc); }

ScriptedRate::ScriptedRate(std::vector<std::pair<SimTime, Duration>> trace) : trace_{std::move(trace)} {
  if (trace_.empty()) throw std::invalid_argument("scripted rate trace is empty");
  std::stable_sort(trace_.begin(), trace_.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  for (const auto& [at, value] : trace_) check_gate_interval(value);
}

Duration ScriptedRate::t_dcc(SimTime now) {
  auto it = std::upper_bound(trace_.begin(), trace_.end(), now,
                             [](SimTime t, const auto& entry) { return t < entry.first; });
  if (it == trace_.begin()) return trace_.front().second;
  return std::prev(it)->second;
}

LoadProportionalRate::LoadProportionalRate(Duration base, double gain, CbrProbe probe)
    : base_{base}, gain_{gain}, probe_{std::move(probe)} {
  if (base_ <= Duration::zero()) throw std::invalid_argument("load-proportional base must be positive");
  if (gain_ < 0.0) throw std::invalid_argument("load-proportional gain must be non-negative");
  if (!probe_) throw std::invalid_argument("load-proportional controller needs a CBR probe");
}

Duration LoadProportionalRate::t_dcc(SimTime now) {
  const double cbr = std::clamp(probe_(now), 0.0, 1.0);
  const auto raw = Duration::us(static_cast<std::int64_t>(
      static_cast<double>(base_.count()) * (1.0 + gain_ * cbr) + 0.5));
  return clamp(raw, kMinGateInterval, kMaxGateInterval);
}

RateBreakdown compute_rates(Duration t_dcc, Duration t_cam) {
  if (t_dcc <= Duration::zero() || t_cam <= Duration::zero()) {
    throw std::invalid_argument("compute_rates needs positive durations");
  }
  RateBreakdown r;
  r.r_total = 1.0 / t_dcc.to_seconds();
  r.r_cam = 1.0 / t_cam.to_seconds();
  if (r.r_cam >= r.r_total) {
    r.r_cam = r.r_total;
    r.r_tc3 = 0.0;
  } else {
    r.r_tc3 = r.r_total - r.r_cam;
  }
  return r;
}

DccGate::DccGate(std::unique_ptr<RateController> controller, GateConfig config)
    : controller_{std::move(controller)}, config_{config} {
  if (!controller_) throw std::invalid_argument("DccGate needs a rate controller");
  if (config_.capacity == 0) throw std::invalid_argument("queue capacity must be positive");
}

EnqueueOutcome DccGate::enqueue(QueuedMessage msg) {
  auto& queue = queues_[index(msg.traffic_class)];
  auto& stats = stats_[index(msg.traffic_class)];
  ++stats.enqueued;
  if (msg.traffic_class == TrafficClass::TC2 && config_.replace_cam && msg.is_cam()) {
    auto older = std::find_if(queue.begin(), queue.end(), [](const QueuedMessage& q) { return q.is_cam(); });
    if (older != queue.end()) {
      *older = std::move(msg);
      ++stats.replaced;
      return EnqueueOutcome::ReplacedOlder;
    }
  }
  if (queue.size() >= config_.capacity) {
    ++stats.dropped;
    return EnqueueOutcome::Dropped;
  }
  queue.push_back(std::move(msg));
  return EnqueueOutcome::Queued;
}

std::optional<QueuedMessage> DccGate::on_gate_open(SimTime now) {
  if (!armed_ || now != t_go_) throw std::logic_error("gate opening outside t_go");
  armed_ = false;
  if (backlog() == 0) {
    return std::nullopt;
  }
  return transmit(now);
}

std::optional<QueuedMessage> DccGate::pass_through(SimTime now) {
  if (armed_ || now < t_go_) return std::nullopt;
  if (backlog() == 0) {
    return std::nullopt;
  }
  return transmit(now);
}

std::size_t DccGate::higher_priority_backlog(TrafficClass tc) const {
  std::size_t n = 0;
  for (std::size_t i = 0; i < index(tc); ++i) n += queues_[i].size();
  return n;
}

std::size_t DccGate::backlog() const {
  std::size_t n = 0;
  for (const auto& q : queues_) n += q.size();
  return n;
}

QueuedMessage DccGate::transmit(SimTime now) {
  auto it = std::find_if(queues_.begin(), queues_.end(), [](const auto& q) { return !q.empty(); });
  auto& queue = *it;
  QueuedMessage msg = std::move(queue.front());
  queue.pop_front();
  ++stats_[index(msg.traffic_class)].transmitted;

  const Duration t_dcc = controller_->t_dcc(now);
  if (t_dcc < kMinGateInterval || t_dcc > kMaxGateInterval) {
    throw std::logic_error("rate controller produced t_dcc outside [25 ms, 1000 ms]");
  }
  last_tx_ = now;
  t_dcc_ = t_dcc;
  t_go_ = now + t_dcc;
  armed_ = true;
  if (listener_) listener_(t_go_, t_dcc_);
  return msg;
}

}  // namespace dccsim::dcc
