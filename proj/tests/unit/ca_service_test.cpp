#include <random>
#include <stdexcept>

#include "doctest.h"
#include "dccsim/ca_service.hpp"

using namespace dccsim;
using namespace dccsim::ca;
using namespace dccsim::literals;

namespace {

CaState with_baseline(SimTime at, VehicleDynamics d = {}) {
  CaState s;
  update_after_generation(s, TriggerDecision::Initial, at, d);
  return s;
}

VehicleDynamics heading(double deg) {
  VehicleDynamics d;
  d.heading = deg;
  return d;
}

}  // namespace

TEST_CASE("first evaluation always generates") {
  CaState s;
  CHECK(evaluate_trigger(s, {}, {}, SimTime::from_ms(3)) == TriggerDecision::Initial);
}

TEST_CASE("DCC lower bound dominates large dynamics changes") {
  auto s = with_baseline(SimTime::zero());
  set_dcc_feedback(s, 200_ms);
  VehicleDynamics moved{{500.0, 0.0}, 30.0, 0.0, 90.0};
  CHECK(evaluate_trigger(s, {}, moved, SimTime::from_ms(150)) == TriggerDecision::None);
}

TEST_CASE("heading change beyond threshold is condition 1") {
  auto s = with_baseline(SimTime::zero());
  set_dcc_feedback(s, 200_ms);
  CHECK(evaluate_trigger(s, {}, heading(10.0), SimTime::from_ms(200)) == TriggerDecision::Condition1);
  CHECK(evaluate_trigger(s, {}, heading(3.9), SimTime::from_ms(200)) == TriggerDecision::None);
}

TEST_CASE("heading compares along the shorter arc") {
  CHECK(heading_delta(358.0, 2.0) == doctest::Approx(4.0));
  CHECK(heading_delta(10.0, 350.0) == doctest::Approx(20.0));
  CHECK(normalize_heading(-90.0) == doctest::Approx(270.0));
  auto s = with_baseline(SimTime::zero(), heading(359.0));
  CHECK(evaluate_trigger(s, {}, heading(2.0), SimTime::from_ms(500)) == TriggerDecision::None);
}

TEST_CASE("position and speed thresholds") {
  TriggerThresholds t;
  VehicleDynamics base;
  VehicleDynamics p = base;
  p.position.x = 4.01;
  CHECK(dynamics_exceeded(base, p, t));
  p.position.x = 4.0;
  CHECK_FALSE(dynamics_exceeded(base, p, t));
  VehicleDynamics v = base;
  v.speed = 0.51;
  CHECK(dynamics_exceeded(base, v, t));
}

TEST_CASE("no change beyond t_gen_cam is condition 2") {
  auto s = with_baseline(SimTime::zero());
  CHECK(evaluate_trigger(s, {}, {}, SimTime::from_ms(1001)) == TriggerDecision::Condition2);
  CHECK(evaluate_trigger(s, {}, {}, SimTime::from_ms(1000)) == TriggerDecision::None);
}

TEST_CASE("fixed interval policy") {
  TriggerPolicy p;
  p.fixed_interval = 300_ms;
  auto s = with_baseline(SimTime::zero());
  set_dcc_feedback(s, 200_ms);
  CHECK(evaluate_trigger(s, p, {}, SimTime::from_ms(290)) == TriggerDecision::None);
  CHECK(evaluate_trigger(s, p, {}, SimTime::from_ms(300)) == TriggerDecision::Condition1);
}

TEST_CASE("condition 1 sets t_gen_cam to the elapsed time and resets the streak") {
  auto s = with_baseline(SimTime::zero());
  s.cond2_streak = 2;
  update_after_generation(s, TriggerDecision::Condition1, SimTime::from_ms(240), {});
  CHECK(s.t_gen_cam == 240_ms);
  CHECK(s.cond2_streak == 0);
  CHECK(s.baseline_time == SimTime::from_ms(240));
}

TEST_CASE("condition 1 elapsed below the floor clamps to 100 ms") {
  auto s = with_baseline(SimTime::zero());
  update_after_generation(s, TriggerDecision::Condition1, SimTime::from_ms(90), {});
  CHECK(s.t_gen_cam == 100_ms);
}

TEST_CASE("third consecutive condition 2 restores 1 s") {
  auto s = with_baseline(SimTime::zero());
  update_after_generation(s, TriggerDecision::Condition1, SimTime::from_ms(300), {});
  REQUIRE(s.t_gen_cam == 300_ms);
  update_after_generation(s, TriggerDecision::Condition2, SimTime::from_ms(700), {});
  update_after_generation(s, TriggerDecision::Condition2, SimTime::from_ms(1100), {});
  CHECK(s.t_gen_cam == 300_ms);
  update_after_generation(s, TriggerDecision::Condition2, SimTime::from_ms(1500), {});
  CHECK(s.t_gen_cam == 1000_ms);
}

TEST_CASE("DCC feedback clamps into the CAM interval range") {
  CaState s;
  set_dcc_feedback(s, 200_ms);
  CHECK(s.t_gen_cam_dcc == 200_ms);
  set_dcc_feedback(s, 25_ms);
  CHECK(s.t_gen_cam_dcc == 100_ms);
  set_dcc_feedback(s, 1000_ms);
  CHECK(s.t_gen_cam_dcc == 1000_ms);
  CHECK_THROWS_AS(set_dcc_feedback(s, 20_ms), std::invalid_argument);
  CHECK_THROWS_AS(set_dcc_feedback(s, 1001_ms), std::invalid_argument);
}

TEST_CASE("ETSI generation stamps the trigger instant") {
  CaState s;
  VehicleDynamics d{{1.0, 2.0}, 3.0, 0.0, 45.0};
  const auto cam = generate_cam_etsi(s, TriggerDecision::Initial, 7, d, SimTime::from_ms(1234));
  CHECK(cam.sender == 7);
  CHECK(cam.gen_timestamp == SimTime::from_ms(1234));
  CHECK(cam.dynamics == d);
  CHECK(s.baseline_time == SimTime::from_ms(1234));
}

TEST_CASE("GoT defers to t_go minus epsilon") {
  auto s = with_baseline(SimTime::zero());
  const SimTime now = SimTime::from_ms(1000);
  const auto a = got_on_trigger(s, TriggerDecision::Condition1, {}, now, now + 50_ms, 15_ms);
  CHECK(a.kind == GotAction::Kind::Defer);
  CHECK(a.wakeup_at == now + 35_ms);
  REQUIRE(s.pending);
  CHECK(s.pending->stored_time == now);
  CHECK_THROWS_AS(got_on_trigger(s, TriggerDecision::Condition1, {}, now, now + 50_ms, 15_ms), std::logic_error);
}

TEST_CASE("GoT generates immediately inside the epsilon window") {
  auto s = with_baseline(SimTime::zero());
  const SimTime now = SimTime::from_ms(1000);
  CHECK(got_on_trigger(s, TriggerDecision::Condition1, {}, now, now + 10_ms, 15_ms).kind ==
        GotAction::Kind::GenerateNow);
  CHECK(got_on_trigger(s, TriggerDecision::Condition1, {}, now, now, 15_ms).kind == GotAction::Kind::GenerateNow);
  CHECK(got_on_trigger(s, TriggerDecision::Condition1, {}, now, now + 15_ms, 15_ms).kind ==
        GotAction::Kind::GenerateNow);
  CHECK_FALSE(s.pending);
}

TEST_CASE("GoT completion stamps t' but moves the baseline to the stored trigger") {
  auto s = with_baseline(SimTime::zero());
  VehicleDynamics stored{{1.0, 0.0}, 5.0, 0.0, 0.0};
  VehicleDynamics fresh{{2.0, 0.0}, 5.0, 0.0, 0.0};
  got_on_trigger(s, TriggerDecision::Condition1, stored, SimTime::from_ms(300), SimTime::from_ms(400), 15_ms);
  const auto cam = got_complete(s, 3, fresh, SimTime::from_ms(385));
  CHECK(cam.gen_timestamp == SimTime::from_ms(385));
  CHECK(cam.dynamics == fresh);
  CHECK(s.baseline_time == SimTime::from_ms(300));
  CHECK(s.baseline_dynamics == stored);
  CHECK(s.t_gen_cam == 300_ms);
  CHECK_FALSE(s.pending);
  CHECK_THROWS_AS(got_complete(s, 3, fresh, SimTime::from_ms(390)), std::logic_error);
}

TEST_CASE("GoT completion with unchanged dynamics is still stamped t'") {
  auto s = with_baseline(SimTime::zero());
  got_on_trigger(s, TriggerDecision::Condition1, {}, SimTime::from_ms(300), SimTime::from_ms(400), 15_ms);
  CHECK(got_complete(s, 0, {}, SimTime::from_ms(385)).gen_timestamp == SimTime::from_ms(385));
}

TEST_CASE("rearm follows a pushed-back t_go") {
  auto s = with_baseline(SimTime::zero());
  got_on_trigger(s, TriggerDecision::Condition1, {}, SimTime::from_ms(1100), SimTime::from_ms(1200), 15_ms);
  REQUIRE(s.pending->wakeup_at == SimTime::from_ms(1185));
  const auto w = got_rearm(s, SimTime::from_ms(1400), 15_ms, SimTime::from_ms(1200));
  REQUIRE(w);
  CHECK(*w == SimTime::from_ms(1385));
  CHECK(s.pending->stored_time == SimTime::from_ms(1100));
}

TEST_CASE("rearm into the past fires now, and without a pending trigger is a no-op") {
  auto s = with_baseline(SimTime::zero());
  CHECK_FALSE(got_rearm(s, SimTime::from_ms(500), 15_ms, SimTime::from_ms(400)));
  got_on_trigger(s, TriggerDecision::Condition1, {}, SimTime::from_ms(300), SimTime::from_ms(400), 15_ms);
  CHECK(*got_rearm(s, SimTime::from_ms(410), 15_ms, SimTime::from_ms(399)) == SimTime::from_ms(399));
}

TEST_CASE("property: condition 1 always leaves a zero streak and t_gen_cam in range") {
  std::mt19937_64 rng{42};
  std::uniform_int_distribution<int> pick{0, 2};
  std::uniform_int_distribution<std::int64_t> gap{1, 2'000'000};
  for (int trial = 0; trial < 200; ++trial) {
    auto s = with_baseline(SimTime::zero());
    SimTime t = SimTime::zero();
    for (int i = 0; i < 50; ++i) {
      t += Duration::us(gap(rng));
      const auto d = pick(rng) == 0 ? TriggerDecision::Condition1 : TriggerDecision::Condition2;
      update_after_generation(s, d, t, {});
      if (d == TriggerDecision::Condition1) CHECK(s.cond2_streak == 0);
      CHECK(s.t_gen_cam >= kMinGenerationInterval);
      CHECK(s.t_gen_cam <= kMaxGenerationInterval);
    }
  }
}

TEST_CASE("property: ETSI generation intervals stay within the CAM bounds") {
  // Random dynamics polled every 10 ms against a random but valid DCC feedback.
  std::mt19937_64 rng{7};
  std::uniform_int_distribution<std::int64_t> tdcc{25, 1000};
  std::normal_distribution<double> jitter{0.0, 1.0};
  for (int trial = 0; trial < 50; ++trial) {
    CaState s;
    set_dcc_feedback(s, Duration::ms(tdcc(rng)));
    VehicleDynamics d;
    SimTime last;
    bool have_last = false;
    for (SimTime t = SimTime::zero(); t < SimTime::from_ms(60'000); t += 10_ms) {
      d.position.x += jitter(rng);
      d.speed = std::abs(d.speed + 0.1 * jitter(rng));
      d.heading = normalize_heading(d.heading + jitter(rng));
      const auto decision = evaluate_trigger(s, {}, d, t);
      if (decision == TriggerDecision::None) continue;
      generate_cam_etsi(s, decision, 0, d, t);
      if (have_last) {
        CHECK(t - last >= s.t_gen_cam_dcc);
        CHECK(t - last >= kMinGenerationInterval);
        CHECK(t - last <= kMaxGenerationInterval + 10_ms);
      }
      last = t;
      have_last = true;
    }
  }
}
