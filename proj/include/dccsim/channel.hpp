#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <random>
#include <span>
#include <vector>

#include "dccsim/mobility.hpp"
#include "dccsim/sim_time.hpp"

namespace dccsim::channel {

struct ChannelConfig {
  double range_m = 750.0;
  Duration mac_phy_delay = Duration::ms(1);
  double loss_probability = 0.0;
  double data_rate_bps = 6e6;
  Duration cbr_window = Duration::ms(100);
};

struct Delivery {
  std::uint32_t sender = 0;
  std::uint32_t receiver = 0;
  SimTime tx_time;
  SimTime rx_time;
  double distance_m = 0.0;
};

/// Lossy-or-lossless broadcast medium with a fixed access-plus-propagation
/// delay. No collisions, fading or capture.
class Channel {
public:
  using ReceiverFilter = std::function<bool(std::uint32_t receiver)>;

  Channel(ChannelConfig config, const mobility::Mobility& mobility, std::uint64_t seed);

  /// One delivery per other vehicle within range at tx_time that also passes
  /// the optional filter (the filter only limits which receptions are reported;
  /// busy time accrues regardless).
  std::vector<Delivery> broadcast(std::uint32_t size_bytes, std::uint32_t sender, SimTime tx_time,
                                  const ReceiverFilter& listening = {});

  /// Same as broadcast, restricted to the listed receivers (ascending ids).
  std::vector<Delivery> broadcast_to(std::uint32_t size_bytes, std::uint32_t sender, SimTime tx_time,
                                     std::span<const std::uint32_t> receivers);
  /// Accounts airtime for a transmission nobody records (non-CAM traffic).
  void occupy(std::uint32_t size_bytes, std::uint32_t sender, SimTime tx_time);
  /// Fraction of (now - window, now] occupied by transmissions audible at the
  /// vehicle, clamped to [0, 1].
  double measure_cbr(std::uint32_t vehicle, Duration window, SimTime now) const;

  Duration airtime(std::uint32_t size_bytes) const;
  double airtime_seconds(std::uint32_t size_bytes) const;
  double total_busy_seconds() const { return busy_seconds_; }
  const ChannelConfig& config() const { return config_; }

private:
  struct Transmission {
    SimTime tx_time;
    double airtime_s;
    mobility::Vec2 position;
  };

  void prune(SimTime now);

  ChannelConfig config_;
  const mobility::Mobility& mobility_;
  std::mt19937_64 loss_rng_;
  std::bernoulli_distribution loss_;
  std::deque<Transmission> recent_;
  double busy_seconds_ = 0.0;
};

}  // namespace dccsim::channel
