#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "dccsim/dcc_access.hpp"
#include "dccsim/sim_time.hpp"

namespace dccsim::metrics {

struct TxRecord {
  std::uint32_t sender = 0;
  dcc::TrafficClass traffic_class = dcc::TrafficClass::TC2;
  SimTime gen_timestamp;
  SimTime enqueue_time;
  SimTime tx_time;
  Duration queue_wait;
  Duration t_dcc;  // gate interval chosen at this transmission
};

struct RxRecord {
  std::uint32_t sender = 0;
  std::uint32_t receiver = 0;
  SimTime gen_timestamp;
  SimTime rx_time;
  Duration e2e_delay;
  std::optional<Duration> ipg;  // absent for the first CAM of a (sender, receiver) pair
  double distance_m = 0.0;
};

struct AgeRecord {
  std::uint32_t sender = 0;
  std::uint32_t receiver = 0;
  SimTime refresh_time;
  Duration age;
};

TxRecord make_tx_record(const dcc::QueuedMessage& msg, SimTime tx_time, Duration t_dcc);

/// Tracks the last CAM each receiver got from each sender and turns new
/// receptions into RxRecord / AgeRecord pairs.
class NeighborTable {
public:
  std::pair<RxRecord, std::optional<AgeRecord>> record_reception(std::uint32_t sender, std::uint32_t receiver,
                                                                 SimTime gen_timestamp, SimTime rx_time,
                                                                 double distance_m);

private:
  struct Last {
    SimTime gen;
    SimTime rx;
  };
  std::unordered_map<std::uint64_t, Last> last_;
};

/// Mean queue wait when CAM triggers are uncorrelated with gate openings.
Duration expected_queue_wait(Duration t_dcc);

/// Lower bound on the age of CAM n-1 when CAM n arrives over a lossless channel.
Duration min_info_age(Duration queue_wait_n, Duration t_cam_n);

/// Distance covered at constant speed during a delay, in metres.
double position_error(Duration e2e, double speed_mps);

struct Histogram {
  Duration bin_width;
  std::map<std::int64_t, std::uint64_t> bins;  // bin index -> count, [i*w, (i+1)*w)
  std::size_t non_empty() const { return bins.size(); }
};

struct SummaryStats {
  std::uint64_t count = 0;
  double mean = 0.0;  // all values in microseconds
  double sd = 0.0;    // population standard deviation
  double min = 0.0;
  double max = 0.0;
  double p50 = 0.0;
  double p95 = 0.0;
  double p99 = 0.0;
  Histogram histogram;
};

inline constexpr Duration kDelayBinWidth = Duration::ms(10);
inline constexpr Duration kIntervalBinWidth = Duration::ms(25);

/// Nearest-rank percentiles, closed-open histogram bins. Throws
/// std::invalid_argument on an empty sample.
SummaryStats summarize(std::span<const std::int64_t> values_us, Duration bin_width);

// CSV writers. Column order is a fixed contract with downstream tooling.
void write_tx_header(std::ostream& os);
void write_tx_rows(std::ostream& os, std::string_view run_id, std::string_view mode,
                   std::span<const TxRecord> records);
void write_rx_header(std::ostream& os);
void write_rx_rows(std::ostream& os, std::string_view run_id, std::string_view mode,
                   std::span<const RxRecord> records);
void write_age_header(std::ostream& os);
void write_age_rows(std::ostream& os, std::string_view run_id, std::string_view mode,
                    std::span<const AgeRecord> records);
void write_summary_header(std::ostream& os);
void write_summary_row(std::ostream& os, std::string_view run_id, std::string_view mode,
                       std::string_view metric, const SummaryStats& s);
void write_histogram_header(std::ostream& os);
void write_histogram_rows(std::ostream& os, std::string_view run_id, std::string_view mode,
                          std::string_view metric, const Histogram& h);

std::string format_fixed(double v, int decimals = 3);

}  // namespace dccsim::metrics
