#include "dccsim/ca_service.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace dccsim::ca {

double distance(Vec2 a, Vec2 b) { return std::hypot(a.x - b.x, a.y - b.y); }

double normalize_heading(double degrees) {
  double h = std::fmod(degrees, 360.0);
  if (h < 0.0) h += 360.0;
  if (h >= 360.0) h = 0.0;
  return h;
}

double heading_delta(double a, double b) {
  const double d = std::fabs(normalize_heading(a) - normalize_heading(b));
  return d > 180.0 ? 360.0 - d : d;
}

std::string_view to_string(TriggerDecision d) {
  switch (d) {
    case TriggerDecision::None: return "none";
    case TriggerDecision::Initial: return "initial";
    case TriggerDecision::Condition1: return "condition1";
    case TriggerDecision::Condition2: return "condition2";
  }
  return "unknown";
}

std::string_view to_string(Mode m) { return m == Mode::Etsi ? "etsi" : "got"; }

bool dynamics_exceeded(const VehicleDynamics& baseline, const VehicleDynamics& current,
                       const TriggerThresholds& thresholds) {
  return distance(baseline.position, current.position) > thresholds.position_delta ||
         std::fabs(baseline.speed - current.speed) > thresholds.speed_delta ||
         heading_delta(baseline.heading, current.heading) > thresholds.heading_delta;
}

TriggerDecision evaluate_trigger(const CaState& state, const TriggerPolicy& policy,
                                 const VehicleDynamics& current, SimTime now) {
  if (!state.has_baseline) return TriggerDecision::Initial;
  const Duration elapsed = now - state.baseline_time;
  if (elapsed < state.t_gen_cam_dcc) return TriggerDecision::None;
  const bool condition1 = policy.fixed_interval
                              ? elapsed >= *policy.fixed_interval
                              : dynamics_exceeded(state.baseline_dynamics, current, policy.thresholds);
  if (condition1) return TriggerDecision::Condition1;
  if (elapsed > state.t_gen_cam) return TriggerDecision::Condition2;
  return TriggerDecision::None;
}

void update_after_generation(CaState& state, TriggerDecision decision, SimTime trigger_time,
                             const VehicleDynamics& trigger_dynamics) {
  switch (decision) {
    case TriggerDecision::None:
      throw std::logic_error("update_after_generation without a trigger");
    case TriggerDecision::Initial:
      break;
    case TriggerDecision::Condition1:
      state.t_gen_cam =
          clamp(trigger_time - state.baseline_time, kMinGenerationInterval, kMaxGenerationInterval);
      state.cond2_streak = 0;
      break;
    case TriggerDecision::Condition2:
      state.cond2_streak = std::min(state.cond2_streak + 1, kCondition2StreakLimit);
      if (state.cond2_streak >= kCondition2StreakLimit) state.t_gen_cam = kMaxGenerationInterval;
      break;
  }
  state.has_baseline = true;
  state.baseline_time = trigger_time;
  state.baseline_dynamics = trigger_dynamics;
}

void set_dcc_feedback(CaState& state, Duration t_dcc) {
  if (t_dcc < Duration::ms(25) || t_dcc > Duration::ms(1000)) {
    throw std::invalid_argument("t_dcc outside the gatekeeper range [25 ms, 1000 ms]: " +
                                std::to_string(t_dcc.count()) + " us");
  }
  state.t_gen_cam_dcc = clamp(t_dcc, kMinGenerationInterval, kMaxGenerationInterval);
}

CamMessage generate_cam_etsi(CaState& state, TriggerDecision decision, std::uint32_t sender,
                             const VehicleDynamics& current, SimTime now, std::uint32_t size) {
  update_after_generation(state, decision, now, current);
  return CamMessage{sender, now, current, size};
}

GotAction got_on_trigger(CaState& state, TriggerDecision decision, const VehicleDynamics& current,
                         SimTime now, SimTime t_go, Duration epsilon) {
  if (state.pending) throw std::logic_error("GoT trigger while another trigger is pending");
  if ((t_go - now) - epsilon <= Duration::zero()) return GotAction{GotAction::Kind::GenerateNow, now};
  const SimTime wakeup = t_go - epsilon;
  state.pending = PendingTrigger{now, current, decision, wakeup, EventHandle{}};
  return GotAction{GotAction::Kind::Defer, wakeup};
}

CamMessage got_complete(CaState& state, std::uint32_t sender, const VehicleDynamics& fresh,
                        SimTime t_prime, std::uint32_t size) {
  if (!state.pending) throw std::logic_error("got_complete without a pending trigger");
  const PendingTrigger pending = *state.pending;
  state.pending.reset();
  update_after_generation(state, pending.decision, pending.stored_time, pending.stored_dynamics);
  return CamMessage{sender, t_prime, fresh, size};
}

std::optional<SimTime> got_rearm(CaState& state, SimTime new_t_go, Duration epsilon, SimTime now) {
  if (!state.pending) return std::nullopt;
  const SimTime target = new_t_go - epsilon;
  state.pending->wakeup_at = target < now ? now : target;
  return state.pending->wakeup_at;
}

}  // namespace dccsim::ca
