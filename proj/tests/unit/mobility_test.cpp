#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "dccsim/mobility.hpp"

using namespace dccsim;
using namespace dccsim::mobility;
using namespace dccsim::literals;

TEST_CASE("static vehicles never move") {
  StaticLine m{{300, 200.0}};
  CHECK(m.vehicle_count() == 300);
  for (std::uint32_t v : {0u, 17u, 299u}) {
    CHECK(m.dynamics_at(v, SimTime::from_ms(123456)) == m.dynamics_at(v, SimTime::zero()));
  }
  CHECK(m.position_at(3, SimTime::zero()).x == doctest::Approx(600.0));
  CHECK_THROWS_AS(m.dynamics_at(300, SimTime::zero()), std::out_of_range);
}

TEST_CASE("measurement range boundaries") {
  CHECK(StaticLine{{2, 399.0}}.in_measurement_range(0, 1, SimTime::zero()));
  CHECK_FALSE(StaticLine{{2, 401.0}}.in_measurement_range(0, 1, SimTime::zero()));
  CHECK(StaticLine{{300, 200.0}}.in_measurement_range(10, 11, SimTime::zero()));
}

TEST_CASE("ring vehicle advances speed times time") {
  RingConfig cfg;
  cfg.speed_jitter = 0.0;
  Ring r{cfg, 3};
  CHECK(r.speed_of(0) == doctest::Approx(14.27));
  CHECK(r.arc_length_travelled(0, SimTime::zero() + 10_s) == doctest::Approx(142.7));
}

TEST_CASE("ring queries are deterministic per seed") {
  RingConfig cfg;
  Ring a{cfg, 9};
  Ring b{cfg, 9};
  Ring c{cfg, 10};
  bool differs = false;
  for (std::uint32_t v = 0; v < a.vehicle_count(); v += 37) {
    CHECK(a.dynamics_at(v, SimTime::from_ms(4321)) == b.dynamics_at(v, SimTime::from_ms(4321)));
    differs |= !(a.dynamics_at(v, SimTime::from_ms(4321)) == c.dynamics_at(v, SimTime::from_ms(4321)));
  }
  CHECK(differs);
}

TEST_CASE("ring population follows density") {
  for (double d : {10.0, 20.0, 30.0, 40.0, 50.0}) {
    RingConfig cfg;
    cfg.density = d;
    Ring r{cfg, 1};
    CHECK(r.vehicle_count() == static_cast<std::size_t>(std::llround(d * 7.75 * 8)));
  }
}

TEST_CASE("ring speeds stay within the jitter band and lanes alternate direction") {
  RingConfig cfg;
  Ring r{cfg, 4};
  for (std::uint32_t v = 0; v < r.vehicle_count(); ++v) {
    CHECK(r.speed_of(v) >= 14.27 * 0.9 - 1e-9);
    CHECK(r.speed_of(v) <= 14.27 * 1.1 + 1e-9);
    CHECK(r.lane_of(v) >= 0);
    CHECK(r.lane_of(v) < 8);
  }
  CHECK(r.max_speed() <= 14.27 * 1.1 + 1e-9);
}

TEST_CASE("property: positions move continuously and headings follow the motion") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    RingConfig cfg;
    cfg.density = 5.0;
    Ring r{cfg, seed};
    const double step = r.max_speed() * 0.01 + 1e-9;
    for (std::uint32_t v = 0; v < r.vehicle_count(); ++v) {
      auto prev = r.dynamics_at(v, SimTime::zero());
      for (SimTime t = SimTime::from_ms(10); t <= SimTime::from_ms(20'000); t += 10_ms) {
        const auto cur = r.dynamics_at(v, t);
        CHECK(ca::distance(prev.position, cur.position) <= step);
        CHECK(cur.heading >= 0.0);
        CHECK(cur.heading < 360.0);
        prev = cur;
      }
    }
  }
}

TEST_CASE("measurement zone is a short window of the road") {
  RingConfig cfg;
  cfg.density = 20.0;
  Ring r{cfg, 1};
  std::size_t inside = 0;
  for (std::uint32_t v = 0; v < r.vehicle_count(); ++v) inside += r.in_measurement_zone(v, SimTime::zero());
  // 200 m out of 7750 m on each lane, so roughly 2.6 % of the vehicles.
  CHECK(inside > 0);
  CHECK(inside < r.vehicle_count() / 10);
  cfg.zone_half_length_m = 0.0;
  Ring all{cfg, 1};
  CHECK(all.in_measurement_zone(5, SimTime::zero()));
}

TEST_CASE("property: zone membership holds until the announced change, then flips") {
  RingConfig cfg;
  cfg.density = 3.0;
  cfg.circumference_m = 1500.0;
  Ring r{cfg, 6};
  std::size_t flips = 0;
  for (std::uint32_t v = 0; v < r.vehicle_count(); ++v) {
    SimTime t = SimTime::zero();
    while (t < SimTime::from_ms(120'000)) {
      const bool inside = r.in_measurement_zone(v, t);
      const SimTime next = r.next_zone_change(v, t);
      REQUIRE(next > t);
      for (int k = 1; k < 8; ++k) {
        const SimTime probe = t + Duration::us((next - t).count() * k / 8);
        if (probe < next) CHECK(r.in_measurement_zone(v, probe) == inside);
      }
      if (r.in_measurement_zone(v, next) != inside) ++flips;
      t = next;
    }
  }
  CHECK(flips > r.vehicle_count());
  StaticLine s{{3, 10.0}};
  CHECK(s.next_zone_change(0, SimTime::zero()) > SimTime::from_ms(1'000'000'000));
}
