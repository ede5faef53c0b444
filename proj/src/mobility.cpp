#include "dccsim/mobility.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "dccsim/rng.hpp"

namespace dccsim::mobility {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kRadToDeg = 180.0 / kPi;
}  // namespace

void Mobility::check_id(std::uint32_t vehicle) const {
  if (vehicle >= vehicle_count()) {
    throw std::out_of_range("unknown vehicle id " + std::to_string(vehicle));
  }
}

bool Mobility::in_measurement_zone(std::uint32_t vehicle, SimTime) const {
  check_id(vehicle);
  return true;
}

SimTime Mobility::next_zone_change(std::uint32_t vehicle, SimTime) const {
  check_id(vehicle);
  return SimTime::zero() + Duration::max();
}

bool Mobility::in_measurement_range(std::uint32_t a, std::uint32_t b, SimTime t, double limit_m) const {
  return ca::distance(position_at(a, t), position_at(b, t)) <= limit_m;
}

StaticLine::StaticLine(StaticConfig config) : config_{config} {
  if (config_.vehicles == 0) throw std::invalid_argument("static scenario needs at least one vehicle");
  if (!(config_.spacing_m > 0.0)) throw std::invalid_argument("static spacing must be positive");
}

VehicleDynamics StaticLine::dynamics_at(std::uint32_t vehicle, SimTime) const {
  check_id(vehicle);
  VehicleDynamics d;
  d.position = Vec2{static_cast<double>(vehicle) * config_.spacing_m, 0.0};
  return d;
}

std::size_t Ring::expected_vehicle_count(const RingConfig& config) {
  return static_cast<std::size_t>(
      std::llround(config.density * config.circumference_m / 1000.0 * config.lanes));
}

Ring::Ring(RingConfig config, std::uint64_t seed) : config_{config} {
  if (config_.lanes < 2 || config_.lanes % 2 != 0) {
    throw std::invalid_argument("ring needs an even number of lanes (>= 2)");
  }
  if (!(config_.density > 0.0)) throw std::invalid_argument("ring density must be positive");
  if (!(config_.mean_speed_mps > 0.0)) throw std::invalid_argument("ring mean speed must be positive");
  if (config_.speed_jitter < 0.0 || config_.speed_jitter >= 1.0) {
    throw std::invalid_argument("speed jitter must lie in [0, 1)");
  }
  const double inner = config_.curve_radius_m - (config_.lanes / 2) * config_.lane_width_m;
  if (!(inner > 0.0)) throw std::invalid_argument("curve radius too small for the lane layout");
  straight_ = (config_.circumference_m - 2.0 * kPi * config_.curve_radius_m) / 2.0;
  if (!(straight_ > 0.0)) throw std::invalid_argument("circumference too small for the curve radius");

  const std::size_t total = expected_vehicle_count(config_);
  const auto lanes = static_cast<std::size_t>(config_.lanes);
  std::vector<std::size_t> per_lane(lanes, 0);
  for (std::size_t i = 0; i < total; ++i) ++per_lane[i % lanes];

  auto placement = make_rng(seed, RngStream::Placement);
  std::uniform_real_distribution<double> unit{0.0, 1.0};
  std::vector<double> lane_phase(lanes);
  for (auto& p : lane_phase) p = unit(placement);

  vehicles_.reserve(total);
  for (std::size_t i = 0; i < total; ++i) {
    const auto lane = static_cast<int>(i % lanes);
    const std::size_t slot = i / lanes;
    const double len = lane_length(lane);
    auto speed_rng = make_rng(seed, RngStream::Speed, i);
    const double jitter = config_.speed_jitter * (2.0 * unit(speed_rng) - 1.0);
    Vehicle v;
    v.lane = lane;
    v.s0 = (static_cast<double>(slot) + lane_phase[lane]) * len / static_cast<double>(per_lane[lane]);
    v.speed = config_.mean_speed_mps * (1.0 + jitter);
    max_speed_ = std::max(max_speed_, v.speed);
    vehicles_.push_back(v);
  }
}

double Ring::lane_offset(int lane) const {
  const int half = config_.lanes / 2;
  const int k = forward(lane) ? lane : lane - half;
  const double offset = (k + 0.5) * config_.lane_width_m;
  return forward(lane) ? offset : -offset;
}

double Ring::lane_length(int lane) const {
  return 2.0 * straight_ + 2.0 * kPi * (config_.curve_radius_m + lane_offset(lane));
}

double Ring::arc_length_travelled(std::uint32_t vehicle, SimTime t) const {
  check_id(vehicle);
  return vehicles_[vehicle].speed * t.to_seconds();
}

double Ring::lane_arc(const Vehicle& v, SimTime t) const {
  const double len = lane_length(v.lane);
  const double travelled = v.speed * t.to_seconds();
  double s = std::fmod(forward(v.lane) ? v.s0 + travelled : v.s0 - travelled, len);
  if (s < 0.0) s += len;
  return s;
}

void Ring::place(double s, double offset, Vec2& position, double& tangent_deg) const {
  const double r = config_.curve_radius_m + offset;
  const double half = straight_ / 2.0;
  const double arc = kPi * r;
  if (s < straight_) {
    position = Vec2{-half + s, -r};
    tangent_deg = 0.0;
  } else if (s < straight_ + arc) {
    const double phi = (s - straight_) / r;
    position = Vec2{half + r * std::sin(phi), -r * std::cos(phi)};
    tangent_deg = phi * kRadToDeg;
  } else if (s < 2.0 * straight_ + arc) {
    position = Vec2{half - (s - straight_ - arc), r};
    tangent_deg = 180.0;
  } else {
    const double phi = (s - 2.0 * straight_ - arc) / r;
    position = Vec2{-half - r * std::sin(phi), r * std::cos(phi)};
    tangent_deg = 180.0 + phi * kRadToDeg;
  }
}

VehicleDynamics Ring::dynamics_at(std::uint32_t vehicle, SimTime t) const {
  check_id(vehicle);
  const Vehicle& v = vehicles_[vehicle];
  VehicleDynamics d;
  double tangent = 0.0;
  place(lane_arc(v, t), lane_offset(v.lane), d.position, tangent);
  d.heading = ca::normalize_heading(forward(v.lane) ? tangent : tangent + 180.0);
  d.speed = v.speed;
  d.acceleration = 0.0;
  return d;
}

bool Ring::in_measurement_zone(std::uint32_t vehicle, SimTime t) const {
  check_id(vehicle);
  if (config_.zone_half_length_m <= 0.0) return true;
  const double s = lane_arc(vehicles_[vehicle], t);
  return std::fabs(s - straight_ / 2.0) <= config_.zone_half_length_m;
}

SimTime Ring::next_zone_change(std::uint32_t vehicle, SimTime t) const {
  check_id(vehicle);
  const Vehicle& v = vehicles_[vehicle];
  if (config_.zone_half_length_m <= 0.0 || v.speed <= 0.0) return SimTime::zero() + Duration::max();
  const double len = lane_length(v.lane);
  const double lo = straight_ / 2.0 - config_.zone_half_length_m;
  const double hi = straight_ / 2.0 + config_.zone_half_length_m;
  const double s = lane_arc(v, t);
  const bool inside = std::fabs(s - straight_ / 2.0) <= config_.zone_half_length_m;
  double ahead = 0.0;
  if (forward(v.lane)) {
    ahead = inside ? hi - s : std::fmod(lo - s + len, len);
  } else {
    ahead = inside ? s - lo : std::fmod(s - hi + len, len);
  }
  const auto us = static_cast<std::int64_t>(std::ceil(ahead / v.speed * 1e6));
  return t + Duration::us(std::max<std::int64_t>(1, us));
}

}  // namespace dccsim::mobility
