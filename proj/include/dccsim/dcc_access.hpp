#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <functional>
#include <memory>
#include <optional>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "dccsim/ca_service.hpp"
#include "dccsim/sim_time.hpp"

namespace dccsim::dcc {

inline constexpr Duration kMinGateInterval = Duration::ms(25);
inline constexpr Duration kMaxGateInterval = Duration::ms(1000);
inline constexpr std::uint32_t kDefaultTc3Size = 332;

/// TC0 has the highest priority; CAMs travel in TC2.
enum class TrafficClass : std::uint8_t { TC0 = 0, TC1 = 1, TC2 = 2, TC3 = 3 };
inline constexpr std::size_t kTrafficClassCount = 4;

constexpr std::size_t index(TrafficClass tc) { return static_cast<std::size_t>(tc); }
std::string_view to_string(TrafficClass tc);

/// Any non-CAM payload (DENM-like TC0/TC1 bursts, TC3 background data).
struct GenericMessage {
  std::uint32_t sender = 0;
  SimTime created;
};

struct QueuedMessage {
  std::variant<ca::CamMessage, GenericMessage> payload;
  SimTime enqueue_time;
  TrafficClass traffic_class = TrafficClass::TC3;
  std::uint32_t size = 0;

  bool is_cam() const { return std::holds_alternative<ca::CamMessage>(payload); }
  const ca::CamMessage& cam() const { return std::get<ca::CamMessage>(payload); }
  SimTime gen_timestamp() const;
};

QueuedMessage make_cam(const ca::CamMessage& cam, SimTime now);
QueuedMessage make_generic(std::uint32_t sender, TrafficClass tc, std::uint32_t size, SimTime now);

enum class EnqueueOutcome : std::uint8_t { Queued, ReplacedOlder, Dropped };

/// Source of the gate interval t_dcc. Implementations must stay within
/// [kMinGateInterval, kMaxGateInterval]; the gate rejects anything else.
class RateController {
public:
  virtual ~RateController() = default;
  virtual Duration t_dcc(SimTime now) = 0;
};

class ConstantRate final : public RateController {
public:
  explicit ConstantRate(Duration t_dcc);
  Duration t_dcc(SimTime) override { return value_; }

private:
  Duration value_;
};

/// Piecewise-constant trace of (time, t_dcc). Before the first breakpoint the
/// first value applies.
class ScriptedRate final : public RateController {
public:
  explicit ScriptedRate(std::vector<std::pair<SimTime, Duration>> trace);
  Duration t_dcc(SimTime now) override;

private:
  std::vector<std::pair<SimTime, Duration>> trace_;
};

/// t_dcc = clamp(base * (1 + gain * cbr), 25 ms, 1000 ms), with cbr read from
/// the probe at each transmission.
class LoadProportionalRate final : public RateController {
public:
  using CbrProbe = std::function<double(SimTime)>;
  LoadProportionalRate(Duration base, double gain, CbrProbe probe);
  Duration t_dcc(SimTime now) override;

private:
  Duration base_;
  double gain_;
  CbrProbe probe_;
};

struct RateBreakdown {
  double r_total = 0.0;  // Hz
  double r_cam = 0.0;
  double r_tc3 = 0.0;
};

/// Per-vehicle message rates for a steady gate interval and CAM interval.
/// r_tc3 clamps at zero when CAM demand meets the gate supply. Throws
/// std::invalid_argument for non-positive durations.
RateBreakdown compute_rates(Duration t_dcc, Duration t_cam);

struct QueueStats {
  std::uint64_t enqueued = 0;
  std::uint64_t replaced = 0;
  std::uint64_t dropped = 0;
  std::uint64_t transmitted = 0;
};

struct GateConfig {
  bool replace_cam = true;       // TC2 holds at most one CAM
  std::size_t capacity = 100;    // per class, drop-tail
};

/// Access-layer gatekeeper. Dequeues at most one message per opening, highest
/// class first, and reopens t_dcc after each transmission. An opening with
/// nothing queued leaves the gate idle; the next arrival then passes straight
/// through (see pass_through).
class DccGate {
public:
  using Listener = std::function<void(SimTime t_go, Duration t_dcc)>;

  DccGate(std::unique_ptr<RateController> controller, GateConfig config = {});

  EnqueueOutcome enqueue(QueuedMessage msg);

  /// Must be called at exactly next_gate_time() while an opening is armed.
  std::optional<QueuedMessage> on_gate_open(SimTime now);

  /// Transmits immediately if the gate is idle-open and something is queued.
  std::optional<QueuedMessage> pass_through(SimTime now);

  SimTime next_gate_time() const { return t_go_; }
  std::optional<SimTime> last_tx() const { return last_tx_; }
  Duration current_t_dcc() const { return t_dcc_; }

  /// True when a transmission has set t_go and its opening has not fired yet.
  bool opening_armed() const { return armed_; }

  std::size_t queue_length(TrafficClass tc) const { return queues_[index(tc)].size(); }
  std::size_t higher_priority_backlog(TrafficClass tc) const;
  std::size_t backlog() const;
  const QueueStats& stats(TrafficClass tc) const { return stats_[index(tc)]; }

  void set_listener(Listener listener) { listener_ = std::move(listener); }

private:
  QueuedMessage transmit(SimTime now);

  std::unique_ptr<RateController> controller_;
  GateConfig config_;
  std::array<std::deque<QueuedMessage>, kTrafficClassCount> queues_;
  std::array<QueueStats, kTrafficClassCount> stats_{};
  SimTime t_go_ = SimTime::zero();
  std::optional<SimTime> last_tx_;
  Duration t_dcc_ = Duration::zero();
  bool armed_ = false;
  Listener listener_;
};

}  // namespace dccsim::dcc
