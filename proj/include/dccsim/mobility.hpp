#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "dccsim/ca_service.hpp"
#include "dccsim/sim_time.hpp"

namespace dccsim::mobility {

using ca::Vec2;
using ca::VehicleDynamics;

/// Deterministic vehicle trajectories. Every query is a pure function of the
/// construction parameters, the vehicle id and the time. Unknown ids throw
/// std::out_of_range.
class Mobility {
public:
  virtual ~Mobility() = default;

  virtual std::size_t vehicle_count() const = 0;
  virtual VehicleDynamics dynamics_at(std::uint32_t vehicle, SimTime t) const = 0;
  virtual Vec2 position_at(std::uint32_t vehicle, SimTime t) const { return dynamics_at(vehicle, t).position; }
  virtual double max_speed() const = 0;

  /// Whether a receiver at this instant sits in the measured road section.
  virtual bool in_measurement_zone(std::uint32_t vehicle, SimTime t) const;

  bool in_measurement_range(std::uint32_t a, std::uint32_t b, SimTime t, double limit_m = 400.0) const;
  /// Earliest instant after t at which in_measurement_zone may change for this
  /// vehicle; far beyond any horizon when it never changes.
  virtual SimTime next_zone_change(std::uint32_t vehicle, SimTime t) const;

protected:
  void check_id(std::uint32_t vehicle) const;
};

struct StaticConfig {
  std::size_t vehicles = 300;
  double spacing_m = 200.0;
};

/// Immobile vehicles on a straight line, one every spacing_m.
class StaticLine final : public Mobility {
public:
  explicit StaticLine(StaticConfig config);

  std::size_t vehicle_count() const override { return config_.vehicles; }
  VehicleDynamics dynamics_at(std::uint32_t vehicle, SimTime t) const override;
  double max_speed() const override { return 0.0; }

private:
  StaticConfig config_;
};

struct RingConfig {
  double circumference_m = 7750.0;  // centre line
  int lanes = 8;                    // half in each direction
  double density = 10.0;            // vehicles per km per lane
  double mean_speed_mps = 14.27;
  double speed_jitter = 0.1;        // relative, uniform in [-jitter, +jitter]
  double curve_radius_m = 100.0;
  double lane_width_m = 3.5;
  double zone_half_length_m = 100.0;  // 0 disables the measurement zone filter
};

/// Stadium-shaped oval: two straights joined by semicircles. Each lane is its
/// own closed path offset from the centre line; vehicles drive at constant
/// per-vehicle speed and wrap around.
class Ring final : public Mobility {
public:
  Ring(RingConfig config, std::uint64_t seed);

  std::size_t vehicle_count() const override { return vehicles_.size(); }
  VehicleDynamics dynamics_at(std::uint32_t vehicle, SimTime t) const override;
  double max_speed() const override { return max_speed_; }
  bool in_measurement_zone(std::uint32_t vehicle, SimTime t) const override;
  SimTime next_zone_change(std::uint32_t vehicle, SimTime t) const override;

  double straight_length() const { return straight_; }
  int lane_of(std::uint32_t vehicle) const { return vehicles_.at(vehicle).lane; }
  double speed_of(std::uint32_t vehicle) const { return vehicles_.at(vehicle).speed; }
  double lane_length(int lane) const;

  /// Distance travelled along the vehicle's own lane since t = 0.
  double arc_length_travelled(std::uint32_t vehicle, SimTime t) const;

  static std::size_t expected_vehicle_count(const RingConfig& config);

private:
  struct Vehicle {
    int lane = 0;
    double s0 = 0.0;     // initial arc position along the lane
    double speed = 0.0;
  };

  double lane_offset(int lane) const;
  bool forward(int lane) const { return lane < config_.lanes / 2; }
  double lane_arc(const Vehicle& v, SimTime t) const;
  void place(double s, double offset, Vec2& position, double& tangent_deg) const;

  RingConfig config_;
  double straight_ = 0.0;
  double max_speed_ = 0.0;
  std::vector<Vehicle> vehicles_;
};

}  // namespace dccsim::mobility
