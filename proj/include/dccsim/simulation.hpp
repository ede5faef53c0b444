#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "dccsim/ca_service.hpp"
#include "dccsim/channel.hpp"
#include "dccsim/config.hpp"
#include "dccsim/dcc_access.hpp"
#include "dccsim/metrics.hpp"
#include "dccsim/mobility.hpp"
#include "dccsim/scheduler.hpp"

namespace dccsim {

/// Raised when a run breaks one of its own invariants (CLI exit code 2).
class InvariantViolation : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct VehicleQueueReport {
  std::array<dcc::QueueStats, dcc::kTrafficClassCount> stats{};
  std::array<std::size_t, dcc::kTrafficClassCount> still_queued{};
};

/// (vehicle, instant) pair used for per-vehicle event sequences.
struct VehicleInstant {
  std::uint32_t vehicle = 0;
  SimTime at;
  bool operator==(const VehicleInstant&) const = default;
  auto operator<=>(const VehicleInstant&) const = default;
};

struct RunResult {
  std::string run_id;
  ca::Mode mode = ca::Mode::Etsi;
  Duration mac_phy_delay;
  Duration epsilon;
  std::vector<metrics::TxRecord> tx;    // every traffic class, in transmission order
  std::vector<metrics::RxRecord> rx;    // CAM receptions after distance filtering
  std::vector<metrics::AgeRecord> age;
  std::vector<VehicleInstant> cam_generations;  // CAM timestamps (t' under GoT)
  std::vector<VehicleInstant> trigger_baselines;  // baseline instants after each generation
  std::vector<VehicleQueueReport> queues;
  std::uint64_t got_deferrals = 0;
  std::uint64_t got_rearms = 0;
  std::uint64_t got_blocked_wakeups = 0;
  std::uint64_t events_processed = 0;
  double busy_seconds = 0.0;
};

/// One simulation run in a single mode. Owns every piece of mutable state, so
/// independent instances never interact.
class Simulation {
public:
  Simulation(const ScenarioConfig& config, ca::Mode mode);
  ~Simulation();
  Simulation(const Simulation&) = delete;
  Simulation& operator=(const Simulation&) = delete;

  void set_trace(std::ostream* sink);
  RunResult run();

  const mobility::Mobility& mobility() const { return *mobility_; }

private:
  struct Vehicle;

  void start();
  void poll(std::uint32_t v);
  void on_trigger(std::uint32_t v, ca::TriggerDecision decision, const ca::VehicleDynamics& now_dynamics);
  void got_wakeup(std::uint32_t v);
  void on_gate_update(std::uint32_t v, SimTime t_go, Duration t_dcc);
  void emit_cam(std::uint32_t v, const ca::CamMessage& cam);
  void enqueue(std::uint32_t v, dcc::QueuedMessage msg);
  void gate_open(std::uint32_t v);
  void on_transmit(std::uint32_t v, const dcc::QueuedMessage& msg);
  void deliver(const std::vector<channel::Delivery>& deliveries, SimTime gen_timestamp);
  void tc3_arrival(std::uint32_t v, Duration period);
  void zone_change(std::uint32_t v);
  std::unique_ptr<dcc::RateController> make_controller(std::uint32_t v);
  bool recording(SimTime t) const { return t >= SimTime::zero() + config_.warmup; }

  ScenarioConfig config_;
  ca::Mode mode_;
  ca::TriggerPolicy policy_;
  Scheduler scheduler_;
  std::unique_ptr<mobility::Mobility> mobility_;
  std::unique_ptr<channel::Channel> channel_;
  std::vector<Vehicle> vehicles_;
  metrics::NeighborTable neighbors_;
  bool track_zone_ = false;
  std::vector<std::uint32_t> zone_members_;  // ascending ids
  RunResult result_;
};

std::unique_ptr<mobility::Mobility> make_mobility(const ScenarioConfig& config);

std::string run_id(const ScenarioConfig& config);

/// Runs the configured mode, or ETSI then GoT for paired mode.
std::vector<RunResult> run_scenario(const ScenarioConfig& config, std::ostream* trace_etsi = nullptr,
                                    std::ostream* trace_got = nullptr);

/// Per-metric summaries of one run: queue_wait, e2e, ipg, age, gen_interval,
/// tx_interval (CAMs only) and t_dcc (every transmission).
std::map<std::string, metrics::SummaryStats> summarize_run(const RunResult& run);

/// CAM-only helpers shared by the summaries and the acceptance checks.
std::vector<std::int64_t> cam_queue_waits(const RunResult& run);
std::vector<std::int64_t> cam_tx_intervals(const RunResult& run);
std::vector<std::int64_t> cam_gen_intervals(const RunResult& run);

struct ComparisonRow {
  std::string mode;
  double mean_e2e_ms = 0.0;
  double mean_age_ms = 0.0;
  double mean_ipg_ms = 0.0;
  double mean_queue_wait_ms = 0.0;
  double mean_t_dcc_ms = 0.0;
  double mean_t_cam_ms = 0.0;
  double expected_queue_wait_ms = 0.0;  // t_dcc / 2 for uncorrelated triggers
  double min_info_age_ms = 0.0;         // mean t_q + mean t_cam + channel delay
};

ComparisonRow compare_row(const RunResult& run);

struct CsvSinks {
  std::ostream* tx = nullptr;
  std::ostream* rx = nullptr;
  std::ostream* age = nullptr;
  std::ostream* summary = nullptr;
  std::ostream* histogram = nullptr;
  std::ostream* queues = nullptr;
  std::ostream* comparison = nullptr;
};

/// Writes all runs into the sinks in run order, one header per sink.
void write_csvs(const CsvSinks& sinks, const std::vector<RunResult>& runs);

/// Creates dir and writes tx.csv, rx.csv, age.csv, summary.csv,
/// histogram.csv, queues.csv, comparison.csv and the effective config.
void write_outputs(const std::string& dir, const ScenarioConfig& config, const std::vector<RunResult>& runs);

void print_comparison(std::ostream& os, const std::vector<RunResult>& runs);

}  // namespace dccsim
