#include "dccsim/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

namespace dccsim::metrics {

TxRecord make_tx_record(const dcc::QueuedMessage& msg, SimTime tx_time, Duration t_dcc) {
  TxRecord r;
  r.sender = msg.is_cam() ? msg.cam().sender : std::get<dcc::GenericMessage>(msg.payload).sender;
  r.traffic_class = msg.traffic_class;
  r.gen_timestamp = msg.gen_timestamp();
  r.enqueue_time = msg.enqueue_time;
  r.tx_time = tx_time;
  r.queue_wait = tx_time - msg.enqueue_time;
  r.t_dcc = t_dcc;
  return r;
}

std::pair<RxRecord, std::optional<AgeRecord>> NeighborTable::record_reception(
    std::uint32_t sender, std::uint32_t receiver, SimTime gen_timestamp, SimTime rx_time, double distance_m) {
  RxRecord rx{sender, receiver, gen_timestamp, rx_time, rx_time - gen_timestamp, std::nullopt, distance_m};
  std::optional<AgeRecord> age;
  const std::uint64_t key = (static_cast<std::uint64_t>(sender) << 32) | receiver;
  auto [it, inserted] = last_.try_emplace(key, Last{gen_timestamp, rx_time});
  if (!inserted) {
    rx.ipg = rx_time - it->second.rx;
    age = AgeRecord{sender, receiver, rx_time, rx_time - it->second.gen};
    it->second = Last{gen_timestamp, rx_time};
  }
  return {rx, age};
}

Duration expected_queue_wait(Duration t_dcc) {
  if (t_dcc <= Duration::zero()) throw std::invalid_argument("t_dcc must be positive");
  return t_dcc / 2;
}

Duration min_info_age(Duration queue_wait_n, Duration t_cam_n) {
  if (queue_wait_n < Duration::zero() || t_cam_n < Duration::zero()) {
    throw std::invalid_argument("min_info_age needs non-negative inputs");
  }
  return queue_wait_n + t_cam_n;
}

double position_error(Duration e2e, double speed_mps) {
  if (e2e < Duration::zero() || speed_mps < 0.0) {
    throw std::invalid_argument("position_error needs non-negative inputs");
  }
  return e2e.to_seconds() * speed_mps;
}

namespace {

double nearest_rank(const std::vector<std::int64_t>& sorted, double p) {
  const auto n = sorted.size();
  auto rank = static_cast<std::size_t>(std::ceil(p * static_cast<double>(n)));
  rank = std::clamp<std::size_t>(rank, 1, n);
  return static_cast<double>(sorted[rank - 1]);
}

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

}  // namespace

SummaryStats summarize(std::span<const std::int64_t> values_us, Duration bin_width) {
  if (values_us.empty()) throw std::invalid_argument("summarize needs at least one record");
  if (bin_width <= Duration::zero()) throw std::invalid_argument("histogram bin width must be positive");

  SummaryStats s;
  s.count = values_us.size();
  long double sum = 0.0L;
  for (auto v : values_us) sum += static_cast<long double>(v);
  const long double mean = sum / static_cast<long double>(s.count);
  long double sq = 0.0L;
  for (auto v : values_us) {
    const long double d = static_cast<long double>(v) - mean;
    sq += d * d;
  }
  s.mean = static_cast<double>(mean);
  s.sd = static_cast<double>(std::sqrt(sq / static_cast<long double>(s.count)));

  std::vector<std::int64_t> sorted(values_us.begin(), values_us.end());
  std::sort(sorted.begin(), sorted.end());
  s.min = static_cast<double>(sorted.front());
  s.max = static_cast<double>(sorted.back());
  s.p50 = nearest_rank(sorted, 0.50);
  s.p95 = nearest_rank(sorted, 0.95);
  s.p99 = nearest_rank(sorted, 0.99);

  s.histogram.bin_width = bin_width;
  for (auto v : sorted) ++s.histogram.bins[floor_div(v, bin_width.count())];
  return s;
}

std::string format_fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

void write_tx_header(std::ostream& os) {
  os << "run_id,mode,vehicle_id,tc,gen_us,enqueue_us,tx_us,queue_wait_us\n";
}

void write_tx_rows(std::ostream& os, std::string_view run_id, std::string_view mode,
                   std::span<const TxRecord> records) {
  for (const auto& r : records) {
    os << run_id << ',' << mode << ',' << r.sender << ',' << dcc::to_string(r.traffic_class) << ','
       << r.gen_timestamp.us() << ',' << r.enqueue_time.us() << ',' << r.tx_time.us() << ','
       << r.queue_wait.count() << '\n';
  }
}

void write_rx_header(std::ostream& os) {
  os << "run_id,mode,sender,receiver,gen_us,rx_us,e2e_us,ipg_us,distance_m\n";
}

void write_rx_rows(std::ostream& os, std::string_view run_id, std::string_view mode,
                   std::span<const RxRecord> records) {
  for (const auto& r : records) {
    os << run_id << ',' << mode << ',' << r.sender << ',' << r.receiver << ',' << r.gen_timestamp.us() << ','
       << r.rx_time.us() << ',' << r.e2e_delay.count() << ',';
    if (r.ipg) os << r.ipg->count();
    os << ',' << format_fixed(r.distance_m, 2) << '\n';
  }
}

void write_age_header(std::ostream& os) { os << "run_id,mode,sender,receiver,refresh_us,age_us\n"; }

void write_age_rows(std::ostream& os, std::string_view run_id, std::string_view mode,
                    std::span<const AgeRecord> records) {
  for (const auto& r : records) {
    os << run_id << ',' << mode << ',' << r.sender << ',' << r.receiver << ',' << r.refresh_time.us() << ','
       << r.age.count() << '\n';
  }
}

void write_summary_header(std::ostream& os) {
  os << "run_id,mode,metric,count,mean_us,sd_us,p50_us,p95_us,p99_us,min_us,max_us\n";
}

void write_summary_row(std::ostream& os, std::string_view run_id, std::string_view mode,
                       std::string_view metric, const SummaryStats& s) {
  os << run_id << ',' << mode << ',' << metric << ',' << s.count << ',' << format_fixed(s.mean) << ','
     << format_fixed(s.sd) << ',' << format_fixed(s.p50) << ',' << format_fixed(s.p95) << ','
     << format_fixed(s.p99) << ',' << format_fixed(s.min) << ',' << format_fixed(s.max) << '\n';
}

void write_histogram_header(std::ostream& os) { os << "run_id,mode,metric,bin_lo_us,bin_hi_us,count\n"; }

void write_histogram_rows(std::ostream& os, std::string_view run_id, std::string_view mode,
                          std::string_view metric, const Histogram& h) {
  const auto w = h.bin_width.count();
  for (const auto& [bin, count] : h.bins) {
    os << run_id << ',' << mode << ',' << metric << ',' << bin * w << ',' << (bin + 1) * w << ',' << count
       << '\n';
  }
}

}  // namespace dccsim::metrics
