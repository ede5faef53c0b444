#pragma once

#include <cstdint>
#include <optional>
#include <string_view>

#include "dccsim/scheduler.hpp"
#include "dccsim/sim_time.hpp"

namespace dccsim::ca {

inline constexpr Duration kMinGenerationInterval = Duration::ms(100);
inline constexpr Duration kMaxGenerationInterval = Duration::ms(1000);
inline constexpr int kCondition2StreakLimit = 3;
inline constexpr std::uint32_t kDefaultCamSize = 335;

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
  bool operator==(const Vec2&) const = default;
};

double distance(Vec2 a, Vec2 b);

/// Snapshot of the vehicle state a CAM reports and condition 1 compares against.
struct VehicleDynamics {
  Vec2 position;
  double speed = 0.0;         // m/s, >= 0
  double acceleration = 0.0;  // m/s^2
  double heading = 0.0;       // degrees in [0, 360)
  bool operator==(const VehicleDynamics&) const = default;
};

double normalize_heading(double degrees);

/// Shorter angular arc between two headings, in [0, 180].
double heading_delta(double a, double b);

struct TriggerThresholds {
  double position_delta = 4.0;  // m
  double speed_delta = 0.5;     // m/s
  double heading_delta = 4.0;   // degrees
  bool operator==(const TriggerThresholds&) const = default;
};

/// Condition 1 either compares dynamics against thresholds or, for the static
/// experiments, fires once a fixed interval has elapsed since the baseline.
struct TriggerPolicy {
  std::optional<Duration> fixed_interval;
  TriggerThresholds thresholds;
};

enum class TriggerDecision : std::uint8_t { None, Initial, Condition1, Condition2 };

std::string_view to_string(TriggerDecision d);

enum class Mode : std::uint8_t { Etsi, Got };

std::string_view to_string(Mode m);

/// A GoT deferral: the trigger instant and dynamics that become the next baseline.
struct PendingTrigger {
  SimTime stored_time;
  VehicleDynamics stored_dynamics;
  TriggerDecision decision = TriggerDecision::None;
  SimTime wakeup_at;
  EventHandle wakeup;
};

struct CaState {
  bool has_baseline = false;
  SimTime baseline_time;
  VehicleDynamics baseline_dynamics;
  Duration t_gen_cam = kMaxGenerationInterval;
  Duration t_gen_cam_dcc = kMinGenerationInterval;
  int cond2_streak = 0;
  std::optional<PendingTrigger> pending;
};

struct CamMessage {
  std::uint32_t sender = 0;
  SimTime gen_timestamp;
  VehicleDynamics dynamics;
  std::uint32_t size = kDefaultCamSize;
};

bool dynamics_exceeded(const VehicleDynamics& baseline, const VehicleDynamics& current,
                       const TriggerThresholds& thresholds);

/// Initial is returned before the first generation; afterwards the DCC lower
/// bound gates conditions 1 and 2.
TriggerDecision evaluate_trigger(const CaState& state, const TriggerPolicy& policy,
                                 const VehicleDynamics& current, SimTime now);

void update_after_generation(CaState& state, TriggerDecision decision, SimTime trigger_time,
                             const VehicleDynamics& trigger_dynamics);

/// Throws std::invalid_argument when t_dcc lies outside [25 ms, 1000 ms].
void set_dcc_feedback(CaState& state, Duration t_dcc);

CamMessage generate_cam_etsi(CaState& state, TriggerDecision decision, std::uint32_t sender,
                             const VehicleDynamics& current, SimTime now,
                             std::uint32_t size = kDefaultCamSize);

struct GotAction {
  enum class Kind : std::uint8_t { GenerateNow, Defer };
  Kind kind = Kind::GenerateNow;
  SimTime wakeup_at;
};

/// Decides between immediate generation and deferral to t_go - epsilon. A
/// deferral stores (now, current) as the pending trigger; the caller attaches
/// the wakeup handle.
GotAction got_on_trigger(CaState& state, TriggerDecision decision, const VehicleDynamics& current,
                         SimTime now, SimTime t_go, Duration epsilon);

/// Emits the deferred CAM stamped with t_prime and the fresh dynamics, while the
/// baseline advances to the stored trigger. Throws std::logic_error without a
/// pending trigger.
CamMessage got_complete(CaState& state, std::uint32_t sender, const VehicleDynamics& fresh,
                        SimTime t_prime, std::uint32_t size = kDefaultCamSize);

/// New wakeup instant max(now, new_t_go - epsilon), or nullopt when nothing is pending.
/// Stored time and dynamics are left untouched.
std::optional<SimTime> got_rearm(CaState& state, SimTime new_t_go, Duration epsilon, SimTime now);

}  // namespace dccsim::ca
