#include "dccsim/channel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "dccsim/rng.hpp"

namespace dccsim::channel {

Channel::Channel(ChannelConfig config, const mobility::Mobility& mobility, std::uint64_t seed)
    : config_{config},
      mobility_{mobility},
      loss_rng_{make_rng(seed, RngStream::ChannelLoss)},
      loss_{std::clamp(config.loss_probability, 0.0, 1.0)} {
  if (!(config_.range_m > 0.0)) throw std::invalid_argument("channel range must be positive");
  if (config_.loss_probability < 0.0 || config_.loss_probability > 1.0) {
    throw std::invalid_argument("loss probability must lie in [0, 1]");
  }
  if (!(config_.data_rate_bps > 0.0)) throw std::invalid_argument("data rate must be positive");
  if (config_.mac_phy_delay < Duration::zero()) throw std::invalid_argument("negative MAC/PHY delay");
}

double Channel::airtime_seconds(std::uint32_t size_bytes) const {
  return static_cast<double>(size_bytes) * 8.0 / config_.data_rate_bps;
}

Duration Channel::airtime(std::uint32_t size_bytes) const {
  return Duration::seconds(airtime_seconds(size_bytes));
}

void Channel::prune(SimTime now) {
  const Duration keep = std::max(config_.cbr_window, Duration::s(1));
  while (!recent_.empty() && recent_.front().tx_time < now - keep) recent_.pop_front();
}

void Channel::occupy(std::uint32_t size_bytes, std::uint32_t sender, SimTime tx_time) {
  const double air = airtime_seconds(size_bytes);
  busy_seconds_ += air;
  prune(tx_time);
  recent_.push_back(Transmission{tx_time, air, mobility_.position_at(sender, tx_time)});
}

std::vector<Delivery> Channel::broadcast(std::uint32_t size_bytes, std::uint32_t sender, SimTime tx_time,
                                         const ReceiverFilter& listening) {
  occupy(size_bytes, sender, tx_time);
  const mobility::Vec2 origin = recent_.back().position;

  std::vector<Delivery> out;
  const auto n = static_cast<std::uint32_t>(mobility_.vehicle_count());
  for (std::uint32_t rx = 0; rx < n; ++rx) {
    if (rx == sender) continue;
    if (listening && !listening(rx)) continue;
    const double d = ca::distance(origin, mobility_.position_at(rx, tx_time));
    if (d > config_.range_m) continue;
    if (config_.loss_probability > 0.0 && loss_(loss_rng_)) continue;
    out.push_back(Delivery{sender, rx, tx_time, tx_time + config_.mac_phy_delay, d});
  }
  return out;
}

std::vector<Delivery> Channel::broadcast_to(std::uint32_t size_bytes, std::uint32_t sender, SimTime tx_time,
                                            std::span<const std::uint32_t> receivers) {
  occupy(size_bytes, sender, tx_time);
  const mobility::Vec2 origin = recent_.back().position;
  std::vector<Delivery> out;
  for (std::uint32_t rx : receivers) {
    if (rx == sender) continue;
    const double d = ca::distance(origin, mobility_.position_at(rx, tx_time));
    if (d > config_.range_m) continue;
    if (config_.loss_probability > 0.0 && loss_(loss_rng_)) continue;
    out.push_back(Delivery{sender, rx, tx_time, tx_time + config_.mac_phy_delay, d});
  }
  return out;
}

double Channel::measure_cbr(std::uint32_t vehicle, Duration window, SimTime now) const {
  if (window <= Duration::zero()) throw std::invalid_argument("CBR window must be positive");
  const mobility::Vec2 here = mobility_.position_at(vehicle, now);
  const SimTime from = now - window;
  double busy = 0.0;
  for (auto it = recent_.rbegin(); it != recent_.rend() && it->tx_time > from; ++it) {
    if (it->tx_time > now) continue;
    if (ca::distance(here, it->position) <= config_.range_m) busy += it->airtime_s;
  }
  return std::clamp(busy / window.to_seconds(), 0.0, 1.0);
}

}  // namespace dccsim::channel
